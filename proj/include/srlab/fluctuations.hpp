// fluctuations.hpp: Steady-state covariance of the linearized Langevin dynamics
//
// Solves A V + V A^T + D = 0 for the drift matrix A at a stable fixed point and the
// vacuum-input diffusion matrix D = diag(kappa, kappa, 0, 0, 0). V is supported on
// the noise-reachable (controllable) subspace of (A, D); modes the noise never
// reaches carry no fluctuations. This covers the decoupled Z mode at the normal
// phase, the conserved spin length at superradiant points and the free spin at lambda = 0.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "srlab/errors.hpp"
#include "srlab/meanfield.hpp"
#include "srlab/model.hpp"
#include "srlab/parallel.hpp"
#include "srlab/stability.hpp"

namespace srlab {

struct DiffusionMatrix {
    Mat5 matrix{Mat5::Zero()};

    static DiffusionMatrix vacuum(double kappa) {
        DiffusionMatrix d;
        d.matrix(0, 0) = kappa;
        d.matrix(1, 1) = kappa;
        return d;
    }
};

struct CovarianceMatrix {
    Mat5 matrix{Mat5::Zero()};
    int solved_dimension{0};
};

namespace detail {

// Orthonormal basis of span{D, AD, A^2 D, ...}.
inline Eigen::MatrixXd controllable_basis(const Mat5& a, const Mat5& d) {
    const double scale_d = d.cwiseAbs().maxCoeff();
    if (scale_d == 0.0) return Eigen::MatrixXd(5, 0);
    const double scale_a = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double tol = 1e-10;

    std::vector<Vec5> basis;
    auto try_add = [&](Vec5 v) {
        const double n0 = v.norm();
        if (n0 == 0.0) return false;
        v /= n0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) v -= b.dot(v) * b;
        const double n = v.norm();
        if (n <= tol) return false;
        basis.push_back(v / n);
        return true;
    };

    std::vector<Vec5> frontier;
    for (int j = 0; j < 5; ++j) {
        const Vec5 col = d.col(j) / scale_d;
        if (try_add(col)) frontier.push_back(basis.back());
    }
    while (!frontier.empty() && basis.size() < 5) {
        std::vector<Vec5> next;
        for (const auto& v : frontier)
            if (try_add(a * v / scale_a)) next.push_back(basis.back());
        frontier = std::move(next);
    }
    Eigen::MatrixXd out(5, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = basis[i];
    return out;
}

// Kronecker-vectorized Lyapunov solve: (I (x) A + A (x) I) vec(V) = -vec(D).
inline Eigen::MatrixXd lyapunov_dense(const Eigen::MatrixXd& a, const Eigen::MatrixXd& d) {
    const Eigen::Index n = a.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd op(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            op.block(i * n, j * n, n, n) = id(i, j) * a + a(i, j) * id;
        }
    const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(d.data(), n * n);
    const Eigen::VectorXd x = op.fullPivLu().solve(rhs);
    Eigen::MatrixXd v = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    return 0.5 * (v + v.transpose());
}

} // namespace detail

inline CovarianceMatrix lyapunov_solve(const DriftMatrix& a, const DiffusionMatrix& d) {
    const Eigen::MatrixXd basis = detail::controllable_basis(a.matrix, d.matrix);
    CovarianceMatrix v;
    v.solved_dimension = static_cast<int>(basis.cols());
    if (basis.cols() == 0) return v;

    const Eigen::MatrixXd ak = basis.transpose() * a.matrix * basis;
    const Eigen::MatrixXd dk = basis.transpose() * d.matrix * basis;
    Eigen::EigenSolver<Eigen::MatrixXd> es(ak, false);
    if (es.info() != Eigen::Success) throw EigenFailure("eigenvalue solver did not converge");
    double max_re = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        max_re = std::max(max_re, es.eigenvalues()(i).real());
    if (max_re >= -kStabilityRelTol * a.max_abs()) throw UnstableDrift(max_re);

    const Eigen::MatrixXd vk = detail::lyapunov_dense(ak, dk);
    v.matrix = basis * vk * basis.transpose();
    v.matrix = 0.5 * (v.matrix + v.matrix.transpose()).eval();
    return v;
}

inline double lyapunov_residual(const DriftMatrix& a, const CovarianceMatrix& v, const DiffusionMatrix& d) {
    return (a.matrix * v.matrix + v.matrix * a.matrix.transpose() + d.matrix).cwiseAbs().maxCoeff();
}

// <da^dag da> = ((V11 + V22) - 1) / 2
inline double photon_fluctuation(const CovarianceMatrix& v) {
    return 0.5 * ((v.matrix(0, 0) + v.matrix(1, 1)) - 1.0);
}

// Closed-form normal-phase quadrature variance, evaluated exactly as printed. It does
// not agree with the Lyapunov solution in general; lyapunov_solve is authoritative.
inline double np_variance_closed_form(const ModelParams& p) {
    const double d2 = p.delta_c * p.delta_c;
    const double l2 = p.lambda * p.lambda;
    const double k2 = p.kappa * p.kappa;
    const double g2 = p.g_drive * p.g_drive;
    const double first = k2 - 4.0 * g2 + 4.0 * d2;
    const double second = (d2 - l2) + d2 * (k2 - 4.0 * g2);
    const double scale = std::max({1.0, d2, l2, k2, g2}) * 1e-12;
    if (std::abs(first) <= scale || std::abs(second) <= scale)
        throw BoundaryPole("closed-form normal-phase variance has a vanishing denominator");
    const double numer = 2.0 * g2 * ((2.0 * d2 - l2) + d2 * (k2 - 4.0 * g2 + l2));
    return numer / (first * second);
}

struct BranchFluctuation {
    Branch branch{Branch::NpDown};
    double photon_fluctuation{0.0};
    double log_fluctuation{0.0}; // ln(<da^dag da> + 1)
    double residual{0.0};        // max |A V + V A^T + D|
};

inline BranchFluctuation fluctuation_at(const FixedPoint& fp, const ModelParams& p) {
    const DriftMatrix a = jacobian(fp.state, p);
    const DiffusionMatrix d = DiffusionMatrix::vacuum(p.kappa);
    const CovarianceMatrix v = lyapunov_solve(a, d);
    BranchFluctuation out;
    out.branch = fp.branch;
    out.photon_fluctuation = photon_fluctuation(v);
    out.log_fluctuation = std::log(out.photon_fluctuation + 1.0);
    out.residual = lyapunov_residual(a, v, d);
    return out;
}

struct FluctuationPoint {
    double lambda{0.0};
    double g_drive{0.0};
    PhaseLabel label;
    std::vector<FixedPoint> fixed_points;
    std::vector<BranchFluctuation> branches; // one per stable fixed point
    std::string error;
};

inline FluctuationPoint fluctuation_point(const ModelParams& p) {
    FluctuationPoint pt;
    pt.lambda = p.lambda;
    pt.g_drive = p.g_drive;
    try {
        pt.fixed_points = fixed_points(p);
        pt.label = classify_fixed_points(pt.fixed_points);
        for (const auto& fp : pt.fixed_points)
            if (fp.stable) pt.branches.push_back(fluctuation_at(fp, p));
    } catch (const std::exception& e) {
        pt.error = e.what();
    }
    return pt;
}

// Row-major over (lambda, g): index = i_lambda * g_values.size() + i_g.
inline std::vector<FluctuationPoint> fluctuation_map(const std::vector<double>& lambda_values,
                                                     const std::vector<double>& g_values,
                                                     const ModelParams& base, int workers = 1) {
    const std::size_t ng = g_values.size();
    return parallel_map<FluctuationPoint>(lambda_values.size() * ng, workers, [&](std::size_t idx) {
        ModelParams p = base;
        p.lambda = lambda_values[idx / ng];
        p.g_drive = g_values[idx % ng];
        return fluctuation_point(p);
    });
}

} // namespace srlab
