// stability.hpp: Linearized drift matrix and eigenvalue-based stability verdicts
//
// The drift matrix acts on the fluctuation vector (dQ, dP, dX, dY, dZ) with
// dQ = sqrt(2) d(alpha_re) and dP = sqrt(2) d(alpha_im).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "srlab/errors.hpp"
#include "srlab/model.hpp"

namespace srlab {

struct DriftMatrix {
    Mat5 matrix{Mat5::Zero()};

    double max_abs() const { return matrix.cwiseAbs().maxCoeff(); }
};

using Spectrum = std::array<std::complex<double>, 5>;

struct StabilityVerdict {
    double max_real_part{0.0};
    bool stable{false};
    bool marginal{false};
    Spectrum spectrum{};   // full 5x5 spectrum, sorted by descending real part
    int deflated_modes{0}; // conserved-spin-length modes excluded from the verdict
};

inline constexpr double kStabilityRelTol = 1e-9;

inline DriftMatrix jacobian(const SemiclassicalState& s, const ModelParams& p) {
    const double r2 = std::sqrt(2.0);
    const double l = p.lambda;
    const double g2 = 2.0 * p.g_drive;
    DriftMatrix a;
    auto& m = a.matrix;
    m << -p.kappa, p.delta_c - g2, 0.0, -r2 * l, 0.0,
         -p.delta_c - g2, -p.kappa, -r2 * l, 0.0, 0.0,
         0.0, -r2 * l * s.z, 0.0, -p.delta_a, -2.0 * l * s.alpha_im,
         -r2 * l * s.z, 0.0, p.delta_a, 0.0, -2.0 * l * s.alpha_re,
         r2 * l * s.y, r2 * l * s.x, 2.0 * l * s.alpha_im, 2.0 * l * s.alpha_re, 0.0;
    return a;
}

// Jacobian of semiclassical_rhs in the raw (alpha_re, alpha_im, X, Y, Z) coordinates.
inline Mat5 raw_jacobian(const SemiclassicalState& s, const ModelParams& p) {
    const double r2 = std::sqrt(2.0);
    Vec5 t;
    t << r2, r2, 1.0, 1.0, 1.0;
    return t.cwiseInverse().asDiagonal() * jacobian(s, p).matrix * t.asDiagonal();
}

namespace detail {

inline Spectrum sorted_eigenvalues(const Mat5& m) {
    Eigen::EigenSolver<Mat5> es(m, false);
    if (es.info() != Eigen::Success) throw EigenFailure("eigenvalue solver did not converge");
    Spectrum out{};
    for (int i = 0; i < 5; ++i) out[i] = es.eigenvalues()(i);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return out;
}

} // namespace detail

// Orthonormal basis of the tangent space of the spin shell: the complement of
// (0, 0, X, Y, Z). Returns the 5x4 basis, or an empty matrix if the spin vector vanishes.
inline Eigen::MatrixXd tangent_basis(const SemiclassicalState& s) {
    Vec5 w;
    w << 0.0, 0.0, s.x, s.y, s.z;
    const double n = w.norm();
    if (n == 0.0) return {};
    w /= n;
    Mat5 proj = Mat5::Identity() - w * w.transpose();
    Eigen::SelfAdjointEigenSolver<Mat5> es(proj);
    // eigenvalues ascending: {0, 1, 1, 1, 1}
    return es.eigenvectors().rightCols(4);
}

// Verdict over all five eigenvalues.
inline StabilityVerdict assess_stability(const DriftMatrix& a) {
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (!std::isfinite(a.matrix(i, j))) throw EigenFailure("drift matrix has non-finite entries");
    StabilityVerdict v;
    v.spectrum = detail::sorted_eigenvalues(a.matrix);
    v.max_real_part = v.spectrum[0].real();
    const double eps = kStabilityRelTol * a.max_abs();
    v.stable = v.max_real_part < -eps;
    v.marginal = std::abs(v.max_real_part) <= eps;
    return v;
}

// Verdict at a fixed point on the spin shell. X^2+Y^2+Z^2 is conserved, so (0,0,X,Y,Z)
// is a left null vector of the drift matrix and its complement is invariant; the
// verdict uses the four eigenvalues of the restriction to that complement.
inline StabilityVerdict assess_stability(const DriftMatrix& a, const SemiclassicalState& at) {
    StabilityVerdict full = assess_stability(a);
    const Eigen::MatrixXd basis = tangent_basis(at);
    if (basis.size() == 0) return full;
    const Eigen::Matrix4d reduced = basis.transpose() * a.matrix * basis;
    Eigen::EigenSolver<Eigen::Matrix4d> es(reduced, false);
    if (es.info() != Eigen::Success) throw EigenFailure("eigenvalue solver did not converge");
    double max_re = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) max_re = std::max(max_re, es.eigenvalues()(i).real());
    full.max_real_part = max_re;
    const double eps = kStabilityRelTol * a.max_abs();
    full.stable = max_re < -eps;
    full.marginal = std::abs(max_re) <= eps;
    full.deflated_modes = 1;
    return full;
}

} // namespace srlab
