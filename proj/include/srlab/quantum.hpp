// quantum.hpp: Exact finite-N master-equation simulation in the symmetric Dicke sector
//
// Basis |k, n> with spin index k = m + N/2 in [0, N] and photon number n in [0, N_ph];
// flat index k * (N_ph + 1) + n. Density matrices are vectorized column-major, so
// vec(A rho B) = (B^T (x) A) vec(rho).

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>
#ifdef SRLAB_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "srlab/errors.hpp"
#include "srlab/model.hpp"

namespace srlab::quantum {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<cplx>;

inline constexpr int kMaxAtoms = 12;

struct HilbertSpec {
    int n_atoms{1};
    int fock_cutoff{50}; // highest photon number kept

    void validate() const {
        if (n_atoms < 1) throw std::invalid_argument("n_atoms must be >= 1");
        if (n_atoms > kMaxAtoms) throw std::invalid_argument("n_atoms above the supported maximum of 12");
        if (fock_cutoff < 1) throw std::invalid_argument("fock_cutoff must be >= 1");
    }
    int spin_dim() const { return n_atoms + 1; }
    int fock_dim() const { return fock_cutoff + 1; }
    int dim() const { return spin_dim() * fock_dim(); }
    double j() const { return 0.5 * n_atoms; }
    int index(int k, int n) const { return k * fock_dim() + n; }
};

struct Operators {
    SpMat a, a_dag, s_plus, s_minus, s_z;
};

namespace detail {

inline SpMat from_triplets(int dim, const std::vector<Eigen::Triplet<cplx>>& t) {
    SpMat m(dim, dim);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

// <m+1| S_+ |m> for spin index k (m = k - j)
inline double s_plus_element(const HilbertSpec& s, int k) {
    const double j = s.j();
    const double m = k - j;
    return std::sqrt(std::max(0.0, j * (j + 1.0) - m * (m + 1.0)));
}

} // namespace detail

inline Operators collective_operators(const HilbertSpec& spec) {
    spec.validate();
    const int d = spec.dim();
    std::vector<Eigen::Triplet<cplx>> ta, tsp, tsz;
    for (int k = 0; k < spec.spin_dim(); ++k) {
        for (int n = 0; n < spec.fock_dim(); ++n) {
            const int i = spec.index(k, n);
            if (n > 0) ta.emplace_back(spec.index(k, n - 1), i, std::sqrt(double(n)));
            if (k + 1 < spec.spin_dim())
                tsp.emplace_back(spec.index(k + 1, n), i, detail::s_plus_element(spec, k));
            tsz.emplace_back(i, i, k - spec.j());
        }
    }
    Operators ops;
    ops.a = detail::from_triplets(d, ta);
    ops.a_dag = ops.a.adjoint();
    ops.s_plus = detail::from_triplets(d, tsp);
    ops.s_minus = ops.s_plus.adjoint();
    ops.s_z = detail::from_triplets(d, tsz);
    return ops;
}

// H = dc a^dag a + da S_z + (lambda / sqrt N)(S_+ a + S_- a^dag) + G (a^2 + a^dag^2)
inline SpMat build_hamiltonian(const ModelParams& p, const HilbertSpec& spec) {
    p.validate();
    spec.validate();
    const double c = p.lambda / std::sqrt(double(spec.n_atoms));
    std::vector<Eigen::Triplet<cplx>> t;
    for (int k = 0; k < spec.spin_dim(); ++k) {
        for (int n = 0; n < spec.fock_dim(); ++n) {
            const int i = spec.index(k, n);
            t.emplace_back(i, i, p.delta_c * n + p.delta_a * (k - spec.j()));
            // S_+ a |k, n> and its conjugate
            if (n > 0 && k + 1 < spec.spin_dim() && c != 0.0) {
                const double v = c * detail::s_plus_element(spec, k) * std::sqrt(double(n));
                const int f = spec.index(k + 1, n - 1);
                t.emplace_back(f, i, v);
                t.emplace_back(i, f, v);
            }
            if (n > 1 && p.g_drive != 0.0) {
                const double v = p.g_drive * std::sqrt(double(n) * (n - 1));
                const int f = spec.index(k, n - 2);
                t.emplace_back(f, i, v);
                t.emplace_back(i, f, v);
            }
        }
    }
    return detail::from_triplets(spec.dim(), t);
}

struct Liouvillian {
    SpMat matrix; // d vec(rho)/dt = matrix * vec(rho)
    HilbertSpec spec;

    double max_abs() const {
        double m = 0.0;
        for (int k = 0; k < matrix.outerSize(); ++k)
            for (SpMat::InnerIterator it(matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }
};

namespace detail {

// rate * (2 c rho c^dag - c^dag c rho - rho c^dag c)
inline SpMat dissipator(const SpMat& c, double rate, const SpMat& id) {
    const SpMat cdc = SpMat(c.adjoint()) * c;
    const SpMat conj_c = c.conjugate();
    SpMat out = 2.0 * SpMat(Eigen::kroneckerProduct(conj_c, c)) - SpMat(Eigen::kroneckerProduct(id, cdc)) -
                SpMat(Eigen::kroneckerProduct(SpMat(cdc.transpose()), id));
    return rate * out;
}

} // namespace detail

// rho' = -i[H, rho] + kappa D[a] rho + (gamma / N) D[S_-] rho
inline Liouvillian build_liouvillian(const ModelParams& p, const HilbertSpec& spec) {
    const SpMat h = build_hamiltonian(p, spec);
    const Operators ops = collective_operators(spec);
    SpMat id(spec.dim(), spec.dim());
    id.setIdentity();
    const cplx mi(0.0, -1.0);
    SpMat l = mi * (SpMat(Eigen::kroneckerProduct(id, h)) - SpMat(Eigen::kroneckerProduct(SpMat(h.transpose()), id)));
    if (p.kappa > 0.0) l += detail::dissipator(ops.a, p.kappa, id);
    if (p.gamma > 0.0) l += detail::dissipator(ops.s_minus, p.gamma / spec.n_atoms, id);
    l.prune(cplx(0.0, 0.0));
    l.makeCompressed();
    return {std::move(l), spec};
}

struct DensityMatrix {
    CMat rho;
    HilbertSpec spec;

    cplx trace() const { return rho.trace(); }
    double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }
    CVec vectorized() const { return Eigen::Map<const CVec>(rho.data(), rho.size()); }

    static DensityMatrix from_vector(const CVec& v, const HilbertSpec& spec) {
        const int d = spec.dim();
        return {Eigen::Map<const CMat>(v.data(), d, d), spec};
    }

    // |k, n><k, n|
    static DensityMatrix basis_state(const HilbertSpec& spec, int k, int n) {
        DensityMatrix out{CMat::Zero(spec.dim(), spec.dim()), spec};
        out.rho(spec.index(k, n), spec.index(k, n)) = 1.0;
        return out;
    }

    // Hermitian part, rescaled to unit trace
    void hermitize_and_normalize() {
        rho = 0.5 * (rho + rho.adjoint()).eval();
        rho /= rho.trace().real();
    }
};

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    const CMat d = a.rho - b.rho;
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (d + d.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// max |L vec(rho)|
inline double liouvillian_residual(const Liouvillian& l, const DensityMatrix& rho) {
    const CVec r = l.matrix * rho.vectorized();
    return r.cwiseAbs().maxCoeff();
}

struct EvolveOptions {
    double rel_tol{1e-9};
    double abs_tol{1e-11};
    double min_step{1e-12};
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

namespace detail {

// Dormand-Prince 5(4) on a linear system y' = L y, landing exactly on each output time.
inline void dopri_advance(const SpMat& l, CVec& y, double t0, double t1, double& h, const EvolveOptions& opt) {
    static constexpr double a21 = 1.0 / 5, a31 = 3.0 / 40, a32 = 9.0 / 40, a41 = 44.0 / 45, a42 = -56.0 / 15,
                            a43 = 32.0 / 9, a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729, a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656, b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84, e1 = 71.0 / 57600,
                            e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                            e7 = -1.0 / 40;
    double t = t0;
    CVec k1 = l * y, k2, k3, k4, k5, k6, k7, y5;
    while (t < t1) {
        const bool last = t + h >= t1;
        const double step = last ? t1 - t : h;
        k2 = l * (y + step * a21 * k1);
        k3 = l * (y + step * (a31 * k1 + a32 * k2));
        k4 = l * (y + step * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = l * (y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = l * (y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        y5 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        k7 = l * y5;
        const CVec err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y(i)), std::abs(y5(i)));
            en = std::max(en, std::abs(err(i)) / sc);
        }
        if (en <= 1.0) {
            t = last ? t1 : t + step;
            y = y5;
            k1 = k7;
        }
        const double factor = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        const double proposal = step * factor;
        if (en <= 1.0 && last) {
            // keep the unclipped step size for the next interval
            h = std::max(h, proposal);
        } else {
            h = proposal;
        }
        if (h < opt.min_step) throw StepRejected(t, h);
    }
}

} // namespace detail

// Integrates rho' = L rho from t = 0 and records rho at 0, dt, 2 dt, ..., t_final.
inline Trajectory time_evolve(const Liouvillian& l, const DensityMatrix& rho0, double t_final, double dt,
                              const EvolveOptions& opt = {}) {
    if (!(dt > 0.0) || !(t_final >= 0.0)) throw std::invalid_argument("time_evolve: need dt > 0, t_final >= 0");
    Trajectory tr;
    CVec y = rho0.vectorized();
    tr.times.push_back(0.0);
    tr.states.push_back(rho0);
    const auto steps = static_cast<long>(std::ceil(t_final / dt - 1e-9));
    double h = std::min(dt, 1e-3);
    for (long s = 1; s <= steps; ++s) {
        const double t0 = (s - 1) * dt;
        const double t1 = std::min(s * dt, t_final);
        detail::dopri_advance(l.matrix, y, t0, t1, h, opt);
        tr.times.push_back(t1);
        tr.states.push_back(DensityMatrix::from_vector(y, l.spec));
    }
    return tr;
}

struct SteadyStateOptions {
    double residual_tol{1e-9};     // relative to max |L|
    double fallback_time{2000.0};  // integration horizon when the direct solve fails
};

namespace detail {

// Excitation parity (-1)^(k + n) is conserved by H and flipped by both jump operators,
// so rho(i, j) with mismatched parities decouples and vanishes in the steady state.
inline std::vector<int> parity_sector(const HilbertSpec& s) {
    const int d = s.dim();
    std::vector<int> par(d);
    for (int k = 0; k < s.spin_dim(); ++k)
        for (int n = 0; n < s.fock_dim(); ++n) par[s.index(k, n)] = (k + n) % 2;
    std::vector<int> out;
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i)
            if (par[i] == par[j]) out.push_back(j * d + i);
    return out;
}

} // namespace detail

// Direct sparse solve of L vec(rho) = 0 restricted to the parity-matched sector, with the
// rho_00 equation replaced by Tr(rho) = 1. Falls back to time evolution from the ground
// state when the factorization is singular.
inline DensityMatrix steady_state(const Liouvillian& l, const SteadyStateOptions& opt = {}) {
    const int d = l.spec.dim();
    const Eigen::Index n2 = static_cast<Eigen::Index>(d) * d;
    const std::vector<int> sector = detail::parity_sector(l.spec);
    const int ns = static_cast<int>(sector.size());
    std::vector<int> pos(static_cast<std::size_t>(n2), -1);
    for (int r = 0; r < ns; ++r) pos[sector[r]] = r;

    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(l.matrix.nonZeros()) / 2 + d);
    for (int col = 0; col < l.matrix.outerSize(); ++col) {
        const int c = pos[col];
        if (c < 0) continue;
        for (SpMat::InnerIterator it(l.matrix, col); it; ++it) {
            const int r = pos[it.row()];
            if (r > 0) t.emplace_back(r, c, it.value());
        }
    }
    for (int i = 0; i < d; ++i) t.emplace_back(0, pos[i * d + i], 1.0);
    SpMat m(ns, ns);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    CVec rhs = CVec::Zero(ns);
    rhs(0) = 1.0;

    const double scale = l.max_abs();
    DensityMatrix rho{CMat::Zero(d, d), l.spec};
    bool solved = false;
#ifdef SRLAB_HAVE_UMFPACK
    Eigen::UmfPackLU<SpMat> lu;
    lu.umfpackControl()[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
#else
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
#endif
    lu.compute(m);
    if (lu.info() == Eigen::Success) {
        const CVec x = lu.solve(rhs);
        if (lu.info() == Eigen::Success && x.allFinite()) {
            CVec full = CVec::Zero(n2);
            for (int r = 0; r < ns; ++r) full(sector[r]) = x(r);
            rho = DensityMatrix::from_vector(full, l.spec);
            rho.hermitize_and_normalize();
            solved = liouvillian_residual(l, rho) < opt.residual_tol * scale;
        }
    }
    if (!solved) {
        const auto tr = time_evolve(l, DensityMatrix::basis_state(l.spec, 0, 0), opt.fallback_time,
                                    opt.fallback_time);
        rho = tr.states.back();
        rho.hermitize_and_normalize();
    }
    const double res = liouvillian_residual(l, rho);
    if (!(res < opt.residual_tol * scale))
        throw NonConvergence("steady state residual " + std::to_string(res) + " above tolerance", res);
    return rho;
}

inline double mean_photon(const DensityMatrix& r) {
    double s = 0.0;
    for (int k = 0; k < r.spec.spin_dim(); ++k)
        for (int n = 0; n < r.spec.fock_dim(); ++n) {
            const int i = r.spec.index(k, n);
            s += n * r.rho(i, i).real();
        }
    return s;
}

inline cplx field_expectation(const DensityMatrix& r) {
    cplx s = 0.0;
    for (int k = 0; k < r.spec.spin_dim(); ++k)
        for (int n = 1; n < r.spec.fock_dim(); ++n)
            s += std::sqrt(double(n)) * r.rho(r.spec.index(k, n), r.spec.index(k, n - 1));
    return s;
}

struct SpinExpectation {
    double x{0.0}, y{0.0}, z{0.0};
};

inline SpinExpectation collective_spin(const DensityMatrix& r) {
    cplx sp = 0.0;
    double sz = 0.0;
    for (int k = 0; k < r.spec.spin_dim(); ++k) {
        const double c = detail::s_plus_element(r.spec, k);
        for (int n = 0; n < r.spec.fock_dim(); ++n) {
            const int i = r.spec.index(k, n);
            sz += (k - r.spec.j()) * r.rho(i, i).real();
            if (k + 1 < r.spec.spin_dim()) sp += c * r.rho(i, r.spec.index(k + 1, n));
        }
    }
    return {sp.real(), sp.imag(), sz};
}

// Partial trace over the spin index.
inline CMat reduced_cavity(const DensityMatrix& r) {
    const int f = r.spec.fock_dim();
    CMat out = CMat::Zero(f, f);
    for (int k = 0; k < r.spec.spin_dim(); ++k) out += r.rho.block(k * f, k * f, f, f);
    return out;
}

struct WignerGridSpec {
    double x_min{-5.0}, x_max{5.0};
    double p_min{-5.0}, p_max{5.0};
    int nx{101}, np{101};
};

struct WignerGrid {
    std::vector<double> xs; // Re(alpha)
    std::vector<double> ps; // Im(alpha)
    Eigen::MatrixXd w;      // w(ix, ip)

    double dx() const { return xs.size() > 1 ? xs[1] - xs[0] : 1.0; }
    double dp() const { return ps.size() > 1 ? ps[1] - ps[0] : 1.0; }
    double integral() const { return w.sum() * dx() * dp(); }

    // Interior points strictly above all 8 neighbours and above floor * max(W).
    std::vector<std::pair<int, int>> local_maxima(double floor = 1e-2) const {
        std::vector<std::pair<int, int>> out;
        const double thr = floor * w.maxCoeff();
        for (Eigen::Index i = 1; i + 1 < w.rows(); ++i)
            for (Eigen::Index j = 1; j + 1 < w.cols(); ++j) {
                const double v = w(i, j);
                if (v <= thr) continue;
                bool peak = true;
                for (int di = -1; di <= 1 && peak; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                        if ((di || dj) && w(i + di, j + dj) >= v) {
                            peak = false;
                            break;
                        }
                if (peak) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        return out;
    }
};

inline constexpr double kCutoffLeakTol = 1e-3;

// Population of the highest kept Fock level; a displaced copy of the state would leak
// through the cutoff by at least this much.
inline double truncation_leak(const CMat& rho_cav) {
    const auto top = rho_cav.rows() - 1;
    return std::abs(rho_cav(top, top).real());
}

// W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^dag] with P the photon parity. Matrix
// elements of the displaced parity are evaluated in closed form,
//   <n+k| D P D^dag |n> = (-1)^n e^{i k arg alpha} f_n^k(4|alpha|^2),
// with normalized Laguerre functions f_n^k(x) = sqrt(n!/(n+k)!) x^{k/2} e^{-x/2} L_n^k(x).
inline WignerGrid wigner(const CMat& rho_cav, const WignerGridSpec& g = {}) {
    if (rho_cav.rows() != rho_cav.cols() || rho_cav.rows() < 1)
        throw std::invalid_argument("wigner: cavity density matrix must be square");
    if (g.nx < 2 || g.np < 2) throw std::invalid_argument("wigner: need at least 2 points per axis");
    const double leak = truncation_leak(rho_cav);
    if (leak > kCutoffLeakTol) throw CutoffTooSmall(leak);

    const int m = static_cast<int>(rho_cav.rows());
    WignerGrid out;
    out.xs.resize(g.nx);
    out.ps.resize(g.np);
    for (int i = 0; i < g.nx; ++i) out.xs[i] = g.x_min + (g.x_max - g.x_min) * i / (g.nx - 1);
    for (int j = 0; j < g.np; ++j) out.ps[j] = g.p_min + (g.p_max - g.p_min) * j / (g.np - 1);
    out.w.resize(g.nx, g.np);

    std::vector<double> f(m);
    for (int ix = 0; ix < g.nx; ++ix) {
        for (int ip = 0; ip < g.np; ++ip) {
            const cplx alpha(out.xs[ix], out.ps[ip]);
            const double x = 4.0 * std::norm(alpha);
            const double theta = std::arg(alpha);
            double acc = 0.0;
            for (int k = 0; k < m; ++k) {
                const int len = m - k;
                // f_0^k
                if (x == 0.0) f[0] = (k == 0) ? 1.0 : 0.0;
                else f[0] = std::exp(0.5 * k * std::log(x) - 0.5 * x - 0.5 * std::lgamma(k + 1.0));
                if (len > 1) f[1] = (1.0 + k - x) * f[0] / std::sqrt(k + 1.0);
                for (int n = 1; n + 1 < len; ++n)
                    f[n + 1] = ((2.0 * n + 1.0 + k - x) * f[n] - std::sqrt(double(n) * (n + k)) * f[n - 1]) /
                               std::sqrt((n + 1.0) * (n + k + 1.0));
                cplx s = 0.0;
                for (int n = 0; n < len; ++n) s += ((n % 2) ? -f[n] : f[n]) * rho_cav(n, n + k);
                if (k == 0) acc += s.real();
                else acc += 2.0 * (std::polar(1.0, k * theta) * s).real();
            }
            out.w(ix, ip) = 2.0 / std::numbers::pi * acc;
        }
    }
    return out;
}

struct ConvergenceReport {
    int cutoff{0};
    int extended_cutoff{0};
    double value{0.0};
    double extended_value{0.0};
    double relative_difference{0.0};
    bool flagged{false}; // relative difference above 1e-3
};

using Observable = std::function<double(const DensityMatrix&)>;

inline ConvergenceReport cutoff_convergence(const ModelParams& p, const HilbertSpec& spec,
                                            const Observable& observable = mean_photon,
                                            const SteadyStateOptions& opt = {}) {
    HilbertSpec ext = spec;
    ext.fock_cutoff += 10;
    ConvergenceReport r;
    r.cutoff = spec.fock_cutoff;
    r.extended_cutoff = ext.fock_cutoff;
    r.value = observable(steady_state(build_liouvillian(p, spec), opt));
    r.extended_value = observable(steady_state(build_liouvillian(p, ext), opt));
    const double denom = std::max(std::abs(r.extended_value), 1e-12);
    r.relative_difference = std::abs(r.value - r.extended_value) / denom;
    r.flagged = r.relative_difference > 1e-3;
    return r;
}

} // namespace srlab::quantum
