// meanfield.hpp: Mean-field fixed points, analytic phase boundaries and phase classification
//
// Closed-form superradiant branches for equal detunings delta_c = delta_a = delta:
//   Z+- = delta/(2 lambda^2) (-delta +- sqrt(4G^2 - kappa^2))
// followed by a Gauss-Newton polish on the full 5-dim right-hand side.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "srlab/errors.hpp"
#include "srlab/model.hpp"
#include "srlab/stability.hpp"

namespace srlab {

enum class Branch { NpDown, NpUp, SpPlusPos, SpPlusNeg, SpMinusPos, SpMinusNeg };

inline constexpr std::array<Branch, 6> kAllBranches{Branch::NpDown,    Branch::NpUp,
                                                    Branch::SpPlusPos, Branch::SpPlusNeg,
                                                    Branch::SpMinusPos, Branch::SpMinusNeg};

inline std::string to_string(Branch b) {
    switch (b) {
    case Branch::NpDown: return "np_down";
    case Branch::NpUp: return "np_up";
    case Branch::SpPlusPos: return "sp_plus_pos";
    case Branch::SpPlusNeg: return "sp_plus_neg";
    case Branch::SpMinusPos: return "sp_minus_pos";
    case Branch::SpMinusNeg: return "sp_minus_neg";
    }
    return "?";
}

inline bool is_normal(Branch b) { return b == Branch::NpDown || b == Branch::NpUp; }
inline bool is_plus(Branch b) { return b == Branch::SpPlusPos || b == Branch::SpPlusNeg; }
inline bool is_minus(Branch b) { return b == Branch::SpMinusPos || b == Branch::SpMinusNeg; }

struct FixedPoint {
    SemiclassicalState state;
    Branch branch{Branch::NpDown};
    bool stable{false};
    bool marginal{false};
    double max_real_part{0.0};
    Spectrum spectrum{};
    double residual{0.0}; // |semiclassical_rhs| after refinement
};

struct NewtonOptions {
    int max_iterations{50};
    double damping{0.5};
    double tolerance{1e-14}; // relative to max(1, max_rate)
};

// Real roots Z+ then Z-; empty below the drive threshold 2G < kappa, a single value when 2G == kappa.
inline std::vector<double> z_branches(const ModelParams& p) {
    const double delta = p.meanfield_delta();
    if (p.lambda == 0.0) throw ZeroCoupling{};
    const double disc = 4.0 * p.g_drive * p.g_drive - p.kappa * p.kappa;
    if (disc < 0.0) return {};
    const double pre = delta / (2.0 * p.lambda * p.lambda);
    if (disc == 0.0) return {-pre * delta};
    const double root = std::sqrt(disc);
    return {pre * (-delta + root), pre * (-delta - root)};
}

// Symmetric pair of states on the spin shell with the given z; the first has alpha_re >= 0.
inline std::pair<SemiclassicalState, SemiclassicalState> alpha_from_z(double z, const ModelParams& p) {
    const double delta = p.meanfield_delta();
    if (p.lambda == 0.0) throw ZeroCoupling{};
    if (2.0 * p.g_drive < p.kappa) throw std::invalid_argument("alpha_from_z requires 2G >= kappa");
    if (!(std::abs(z) <= 0.5)) throw OffShell(z);

    const double l2 = p.lambda * p.lambda;
    const double pp = 0.25 - z * z;
    const double q = 4.0 * l2 * z * z / (delta * delta);
    if (q == 0.0) throw OffShell(z); // z = 0 needs an infinite field

    const double den = 2.0 * l2 * z + delta * delta - 2.0 * p.g_drive * delta;
    double dir_re = 1.0;
    double dir_im = 0.0;
    if (std::abs(den) > 1e-8) {
        dir_im = p.kappa * delta / den;
    } else {
        // Removable singularity: take the null direction of the steady cavity equations.
        const double u = 2.0 * l2 * z / delta;
        Eigen::Matrix2d m;
        m << -p.kappa, delta - 2.0 * p.g_drive + u,
             -(delta + 2.0 * p.g_drive + u), -p.kappa;
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(m, Eigen::ComputeFullV);
        dir_re = svd.matrixV()(0, 1);
        dir_im = svd.matrixV()(1, 1);
        if (dir_re < 0.0 || (dir_re == 0.0 && dir_im < 0.0)) {
            dir_re = -dir_re;
            dir_im = -dir_im;
        }
    }
    const double scale = std::sqrt(pp / (q * (dir_re * dir_re + dir_im * dir_im)));
    SemiclassicalState s;
    s.alpha_re = scale * dir_re;
    s.alpha_im = scale * dir_im;
    s.z = z;
    s.x = 2.0 * p.lambda * z * s.alpha_re / delta;
    s.y = -2.0 * p.lambda * z * s.alpha_im / delta;
    return {s, s.mirrored()};
}

// Gauss-Newton on [rhs(v); |spin|^2 - 1/4]. The spin-length equation replaces the
// direction in which the rhs Jacobian is always singular.
inline SemiclassicalState newton_refine(const SemiclassicalState& start, const ModelParams& p,
                                        const NewtonOptions& opt = {}) {
    using Vec6 = Eigen::Matrix<double, 6, 1>;
    using Mat65 = Eigen::Matrix<double, 6, 5>;
    auto residual = [&](const Vec5& v) {
        const auto s = SemiclassicalState::from_vector(v);
        Vec6 f;
        f.head<5>() = semiclassical_rhs(s, p);
        f(5) = spin_norm(s) - 0.25;
        return f;
    };
    const double tol = opt.tolerance * std::max(1.0, p.max_rate());
    Vec5 v = start.vector();
    Vec6 f = residual(v);
    double fn = f.norm();
    for (int it = 0; it < opt.max_iterations && fn > tol; ++it) {
        const auto s = SemiclassicalState::from_vector(v);
        Mat65 j;
        j.topRows<5>() = raw_jacobian(s, p);
        j.row(5) << 0.0, 0.0, 2.0 * s.x, 2.0 * s.y, 2.0 * s.z;
        const Vec5 step = j.colPivHouseholderQr().solve(-f);
        double t = 1.0;
        bool improved = false;
        for (int k = 0; k < 30; ++k, t *= opt.damping) {
            const Vec5 trial = v + t * step;
            const Vec6 ft = residual(trial);
            if (ft.norm() < fn) {
                v = trial;
                f = ft;
                fn = ft.norm();
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    return SemiclassicalState::from_vector(v);
}

inline FixedPoint make_fixed_point(const SemiclassicalState& s, Branch b, const ModelParams& p) {
    FixedPoint fp;
    fp.state = s;
    fp.branch = b;
    fp.residual = semiclassical_rhs(s, p).norm();
    const auto verdict = assess_stability(jacobian(s, p), s);
    fp.stable = verdict.stable;
    fp.marginal = verdict.marginal;
    fp.max_real_part = verdict.max_real_part;
    fp.spectrum = verdict.spectrum;
    return fp;
}

// NpDown, NpUp and every superradiant branch point with |Z| < 1/2 (|Z| = 1/2 coincides with NpDown/NpUp).
inline std::vector<FixedPoint> fixed_points(const ModelParams& p, const NewtonOptions& opt = {}) {
    p.meanfield_delta();
    std::vector<FixedPoint> out;
    out.push_back(make_fixed_point(SemiclassicalState::ground(), Branch::NpDown, p));
    out.push_back(make_fixed_point(SemiclassicalState::inverted(), Branch::NpUp, p));
    if (p.lambda == 0.0) return out; // field decouples; only alpha = 0 is a steady state

    const auto zs = z_branches(p);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double z = zs[i];
        if (!(std::abs(z) < 0.5)) continue;
        // The rhs is exactly odd under the Z2 map, so the partner is mirrored, not re-solved.
        const auto pos = newton_refine(alpha_from_z(z, p).first, p, opt);
        const bool plus = (i == 0);
        out.push_back(make_fixed_point(pos, plus ? Branch::SpPlusPos : Branch::SpMinusPos, p));
        out.push_back(make_fixed_point(pos.mirrored(), plus ? Branch::SpPlusNeg : Branch::SpMinusNeg, p));
    }
    return out;
}

inline PhaseLabel classify_fixed_points(const std::vector<FixedPoint>& fps) {
    PhaseLabel label;
    bool np_stable = false, sp_stable = false;
    for (const auto& fp : fps) {
        if (fp.stable) {
            ++label.stable_count;
            (is_normal(fp.branch) ? np_stable : sp_stable) = true;
        } else if (fp.marginal) {
            ++label.marginal_count;
        }
    }
    if (np_stable && sp_stable) label.phase = Phase::Coexistence;
    else if (sp_stable) label.phase = Phase::SuperradiantPhase;
    else label.phase = Phase::NormalPhase; // includes the all-marginal boundary case
    return label;
}

inline PhaseLabel classify_phase(const ModelParams& p) { return classify_fixed_points(fixed_points(p)); }

inline double boundary_g_lower(const ModelParams& p) { return 0.5 * p.kappa; }

// Drive strength at which a superradiant branch detaches from alpha = 0 (Z = -1/2).
inline double boundary_g_upper(double lambda, const ModelParams& p) {
    const double delta = p.meanfield_delta();
    const double d2 = delta * delta;
    const double shift = (d2 - lambda * lambda) / delta;
    return 0.5 * std::sqrt(p.kappa * p.kappa + shift * shift);
}

// Bisection for the point in [lo, hi] where pred(classify_phase) changes value along
// the axis written by `set`. pred(lo) and pred(hi) must differ.
inline double locate_phase_edge(const ModelParams& base, double lo, double hi,
                                const std::function<void(ModelParams&, double)>& set,
                                const std::function<bool(const PhaseLabel&)>& pred,
                                double tol = 1e-10) {
    auto eval = [&](double v) {
        ModelParams p = base;
        set(p, v);
        return pred(classify_phase(p));
    };
    const bool at_lo = eval(lo);
    if (at_lo == eval(hi)) throw std::invalid_argument("locate_phase_edge: predicate does not change on interval");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (eval(mid) == at_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Lower-lambda edge of the coexistence regime at the base drive strength.
inline double locate_coexistence_edge(const ModelParams& base, double lambda_lo, double lambda_hi,
                                      double tol = 1e-10) {
    return locate_phase_edge(
        base, lambda_lo, lambda_hi, [](ModelParams& p, double v) { p.lambda = v; },
        [](const PhaseLabel& l) { return l.phase == Phase::Coexistence; }, tol);
}

} // namespace srlab
