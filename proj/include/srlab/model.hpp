// model.hpp: Parameters, semiclassical state and mean-field equations of motion
//
// Units: every rate and detuning is an angular frequency in rad/us, numerically
// equal to the MHz figures used for the squeezed-drive Tavis-Cummings setup
// (kappa = 0.5, delta = 5, ...). Time is in microseconds and hbar = 1.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "srlab/errors.hpp"

namespace srlab {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

struct ModelParams {
    double delta_c{5.0};   // cavity detuning
    double delta_a{5.0};   // atomic detuning
    double lambda{4.5};    // collective atom-cavity coupling
    double g_drive{0.0};   // squeezed-drive strength G
    double kappa{0.5};     // cavity decay
    double gamma{0.0};     // atomic decay (quantum module only)
    int n_atoms{1};

    void validate() const {
        if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
        if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
        if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
        if (!(g_drive >= 0.0)) throw std::invalid_argument("g_drive must be >= 0");
        if (n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
        if (!std::isfinite(delta_c) || !std::isfinite(delta_a))
            throw std::invalid_argument("detunings must be finite");
    }

    // Common detuning for the analytic mean-field solution (requires delta_c == delta_a != 0).
    double meanfield_delta() const {
        validate();
        if (delta_c != delta_a)
            throw std::invalid_argument("mean-field analysis requires delta_c == delta_a");
        if (delta_c == 0.0) throw DegenerateDetuning{};
        return delta_c;
    }

    double max_rate() const {
        return std::max({std::abs(delta_c), std::abs(delta_a), lambda, g_drive, kappa});
    }

    static ModelParams equal_detuning(double delta, double lambda, double g, double kappa) {
        ModelParams p;
        p.delta_c = p.delta_a = delta;
        p.lambda = lambda;
        p.g_drive = g;
        p.kappa = kappa;
        return p;
    }
};

// <a> = sqrt(N) (alpha_re + i alpha_im), <S_beta> = N beta.
struct SemiclassicalState {
    double alpha_re{0.0};
    double alpha_im{0.0};
    double x{0.0};
    double y{0.0};
    double z{-0.5};

    Vec5 vector() const { return (Vec5() << alpha_re, alpha_im, x, y, z).finished(); }

    static SemiclassicalState from_vector(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

    // Z2 partner: (alpha, X, Y) -> -(alpha, X, Y)
    SemiclassicalState mirrored() const { return {-alpha_re, -alpha_im, -x, -y, z}; }

    double field_amplitude() const { return std::hypot(alpha_re, alpha_im); }

    static SemiclassicalState ground() { return {}; }
    static SemiclassicalState inverted() { return {0.0, 0.0, 0.0, 0.0, 0.5}; }
};

enum class Phase { NormalPhase, SuperradiantPhase, Coexistence };

struct PhaseLabel {
    Phase phase{Phase::NormalPhase};
    int stable_count{0};
    int marginal_count{0};
};

inline std::string to_string(Phase p) {
    switch (p) {
    case Phase::NormalPhase: return "NP";
    case Phase::SuperradiantPhase: return "SP";
    case Phase::Coexistence: return "COEX";
    }
    return "?";
}

// Mean-field factorized Heisenberg equations; returns d/dt of (alpha_re, alpha_im, X, Y, Z).
// The field rows use delta_c and the spin rows delta_a; sqrt(N) factors cancel.
inline Vec5 semiclassical_rhs(const SemiclassicalState& s, const ModelParams& p) {
    const double l = p.lambda;
    const double g2 = 2.0 * p.g_drive;
    Vec5 d;
    d(0) = (p.delta_c - g2) * s.alpha_im - p.kappa * s.alpha_re - l * s.y;
    d(1) = -(p.delta_c + g2) * s.alpha_re - p.kappa * s.alpha_im - l * s.x;
    d(2) = -p.delta_a * s.y - 2.0 * l * s.z * s.alpha_im;
    d(3) = p.delta_a * s.x - 2.0 * l * s.z * s.alpha_re;
    d(4) = 2.0 * l * (s.alpha_im * s.x + s.alpha_re * s.y);
    return d;
}

inline double spin_norm(const SemiclassicalState& s) {
    return s.x * s.x + s.y * s.y + s.z * s.z;
}

} // namespace srlab
