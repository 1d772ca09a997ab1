// Acceptance runner: `acceptance <1..9|full|all>` prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "srlab/fluctuations.hpp"
#include "srlab/meanfield.hpp"
#include "srlab/quantum.hpp"
#include "srlab/render.hpp"
#include "srlab/sweep.hpp"

using namespace srlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass{true};
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { notes.push_back("info " + what); }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

class Timer {
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();

public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }
};

ModelParams window(double lambda, double g) { return ModelParams::equal_detuning(5.0, lambda, g, 0.5); }

const FixedPoint* stable_sp(const std::vector<FixedPoint>& fps) {
    for (const auto& f : fps)
        if (f.branch == Branch::SpPlusPos && f.stable) return &f;
    return nullptr;
}

double sp_amplitude(double lambda, double g) {
    const auto fps = fixed_points(window(lambda, g));
    const auto* f = stable_sp(fps);
    return f ? std::hypot(f->state.alpha_re, f->state.alpha_im) : 0.0;
}

constexpr double kGTop = 1.2; // Fig. 2 window

// Bisection in G over [0, kGTop] for the first point where pred turns true; kGTop if it never does.
double first_g(double lambda, const std::function<bool(const std::vector<FixedPoint>&)>& pred) {
    auto at = [&](double g) { return pred(fixed_points(window(lambda, g))); };
    if (!at(kGTop)) return kGTop;
    double lo = 0.0, hi = kGTop;
    if (at(lo)) return lo;
    while (hi - lo > 1e-11) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// NP loses stability
double computed_np_edge(double lambda) {
    return first_g(lambda, [](const std::vector<FixedPoint>& fps) {
        for (const auto& f : fps)
            if (f.branch == Branch::NpDown) return !f.stable;
        return true;
    });
}

// a stable SP branch appears
double computed_sp_edge(double lambda) {
    return first_g(lambda, [](const std::vector<FixedPoint>& fps) { return stable_sp(fps) != nullptr; });
}

double closed_np_edge(double lambda) {
    const auto p = window(lambda, 0.0);
    return std::min(std::max(boundary_g_lower(p), boundary_g_upper(lambda, p)), kGTop);
}

double closed_sp_edge(double lambda) {
    const auto p = window(lambda, 0.0);
    return lambda <= 5.0 ? closed_np_edge(lambda) : boundary_g_lower(p);
}

double lambda_iii(double g) { return std::sqrt(25.0 + 5.0 * std::sqrt(4.0 * g * g - 0.25)); }

// ---- criteria ----

Outcome c1() {
    Outcome o;
    Timer t;
    double worst_np = 0.0, worst_sp = 0.0, at_np = 0.0, at_sp = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double l = 2.0 + 7.0 * i / 199.0;
        const double e = std::abs(computed_np_edge(l) - closed_np_edge(l));
        const double f = std::abs(computed_sp_edge(l) - closed_sp_edge(l));
        if (e > worst_np) worst_np = e, at_np = l;
        if (f > worst_sp) worst_sp = f, at_sp = l;
    }
    const double secs = t.seconds();
    o.check(worst_np < 1e-6,
            fmt("NP stability edge vs min(max(k/2, g_upper), 1.2) on 200 lambdas: max deviation %.3g at %.4f",
                worst_np, at_np));
    o.check(worst_sp < 1e-6,
            fmt("SP onset vs max(k/2, g_upper) (lambda<=5) and k/2 (lambda>5): max deviation %.3g at %.4f", worst_sp,
                at_sp));
    const auto p5 = window(5.0, 0.0);
    o.check(boundary_g_upper(5.0, p5) == boundary_g_lower(p5),
            fmt("closed forms meet at lambda=5: g_upper=%.17g, kappa/2=%.17g", boundary_g_upper(5.0, p5),
                boundary_g_lower(p5)));
    o.check(std::abs(computed_np_edge(5.0) - 0.25) < 1e-6 && std::abs(computed_sp_edge(5.0) - 0.25) < 1e-6,
            fmt("computed edges at lambda=5: %.12f, %.12f", computed_np_edge(5.0), computed_sp_edge(5.0)));
    o.check(secs < 1.0, fmt("runtime %.3f s < 1 s", secs));
    return o;
}

Outcome c2() {
    Outcome o;
    Timer t;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double max_res = 0.0, max_norm = 0.0;
    int points = 0, minus_stable = 0;
    for (int i = 0; i < 1000; ++i) {
        const double delta = 0.5 + 9.5 * u(rng);
        const auto p = ModelParams::equal_detuning(delta, 0.5 + 9.5 * u(rng), 2.0 * u(rng), 1.5 * u(rng));
        for (const auto& fp : fixed_points(p)) {
            ++points;
            max_res = std::max(max_res, fp.residual);
            max_norm = std::max(max_norm, std::abs(spin_norm(fp.state) - 0.25));
            if (is_minus(fp.branch) && fp.stable) ++minus_stable;
        }
    }
    int plus = 0, plus_unstable = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto p = window(2.0 + 7.0 * u(rng), 1.2 * u(rng));
        for (const auto& fp : fixed_points(p))
            if (is_plus(fp.branch)) {
                ++plus;
                if (!fp.stable) ++plus_unstable;
            }
    }
    const double secs = t.seconds();
    o.check(max_res < 1e-10, fmt("%d fixed points over 1000 random draws: max RHS residual %.3g", points, max_res));
    o.check(max_norm < 1e-10, fmt("max |X^2+Y^2+Z^2 - 1/4| = %.3g", max_norm));
    o.check(minus_stable == 0, fmt("stable Z- fixed points: %d", minus_stable));
    o.check(plus > 0 && plus_unstable == 0,
            fmt("Z+ points inside the SP window (1000 draws, kappa=0.5, Delta=5): %d, unstable %d", plus, plus_unstable));
    o.check(secs < 10.0, fmt("runtime %.3f s < 10 s", secs));
    return o;
}

Outcome c3() {
    Outcome o;
    // Fig. 3(a) window
    const int nl = 141, ng = 121;
    std::map<int, int> counts;
    int mismatch = 0, compared = 0;
    for (int i = 0; i < nl; ++i)
        for (int j = 0; j < ng; ++j) {
            const double l = 2.0 + 7.0 * i / (nl - 1), g = 1.2 * j / (ng - 1);
            const int n = classify_phase(window(l, g)).stable_count;
            // expected regime from the closed-form boundaries, skipping points on an edge
            const double lo = closed_sp_edge(l);
            if (std::abs(g - 0.25) < 1e-9 || std::abs(g - lo) < 1e-9) continue;
            if (g > 0.25 && l > 5.0 && std::abs(l - lambda_iii(g)) < 1e-9) continue;
            int want = 1;
            if (g > lo) want = (l > 5.0 && l > lambda_iii(g)) ? 3 : 2;
            ++counts[n];
            ++compared;
            if (n != want) ++mismatch;
        }
    o.check(counts[1] > 0 && counts[2] > 0 && counts[3] > 0 && counts.size() == 3,
            fmt("regime counts on 141x121 grid off the edges: I=%d II=%d III=%d, other=%zu", counts[1], counts[2], counts[3],
                counts.size() - 3));
    o.check(mismatch == 0, fmt("stable_count vs closed-form regions: %d mismatches of %d", mismatch, compared));
    double worst = 0.0;
    for (double g : {0.3, 0.4, 0.6, 0.8, 1.0, 1.2}) {
        const double edge = locate_coexistence_edge(window(5.0, g), 5.0 + 1e-9, 9.5, 1e-11);
        worst = std::max(worst, std::abs(edge - lambda_iii(g)));
    }
    o.check(worst < 1e-6, fmt("numerically located III edge vs sqrt(D^2 + D sqrt(4G^2-k^2)): max deviation %.3g", worst));
    return o;
}

Outcome c4() {
    Outcome o;
    Timer t;
    auto np_fluct = [](double g) {
        const auto p = window(4.5, g);
        for (const auto& fp : fixed_points(p))
            if (fp.branch == Branch::NpDown) return fluctuation_at(fp, p);
        throw Error("no NP fixed point");
    };
    const auto a = np_fluct(0.25 * (1 - 1e-2)), b = np_fluct(0.25 * (1 - 1e-3));
    const double ratio = b.photon_fluctuation / a.photon_fluctuation;
    const double secs = t.seconds();
    o.check(ratio >= 5.0, fmt("<da+da> at G=0.25(1-1e-3) / at G=0.25(1-1e-2) = %.6g / %.6g = %.4f (need >= 5)",
                              b.photon_fluctuation, a.photon_fluctuation, ratio));
    o.check(std::max(a.residual, b.residual) < 1e-10,
            fmt("Lyapunov residuals %.3g, %.3g", a.residual, b.residual));
    o.check(secs < 1.0, fmt("runtime %.3f s < 1 s", secs));
    const double gc = boundary_g_upper(4.5, window(4.5, 0.0));
    const auto c = np_fluct(gc * (1 - 1e-2)), d = np_fluct(gc * (1 - 1e-3));
    o.info(fmt("same ratio approaching the NP stability edge G_c=%.7f instead: %.6g / %.6g = %.3f", gc,
               d.photon_fluctuation, c.photon_fluctuation, d.photon_fluctuation / c.photon_fluctuation));
    return o;
}

Outcome c5() {
    Outcome o;
    Timer t;
    const double below = sp_amplitude(7.0, 0.25 - 1e-9), above = sp_amplitude(7.0, 0.25 + 1e-9);
    o.check(below == 0.0 && above > 0.1,
            fmt("lambda=7: |alpha| = %.3g at G=0.25-1e-9, %.6f at G=0.25+1e-9", below, above));
    double far_below = 0.0;
    for (int i = 0; i <= 50; ++i) far_below = std::max(far_below, sp_amplitude(7.0, 0.25 * i / 51.0));
    o.check(far_below == 0.0, "lambda=7: no stable SP amplitude on G in [0, 0.25)");

    const double gc = computed_sp_edge(4.5);
    o.check(std::abs(gc - 0.536771) <= 1e-5, fmt("lambda=4.5: SP appears at G_c=%.8f (target 0.536771 +- 1e-5)", gc));
    std::vector<double> amp;
    for (double dg : {1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 5e-2}) amp.push_back(sp_amplitude(4.5, gc + dg));
    const bool rising = std::is_sorted(amp.begin(), amp.end()) && amp.front() > 0.0;
    o.check(rising && amp.front() < 1e-3 && sp_amplitude(4.5, gc - 1e-8) == 0.0,
            fmt("lambda=4.5: |alpha| at G_c+{1e-8,1e-6,1e-4,1e-2}: %.3g %.3g %.3g %.3g", amp[0], amp[1], amp[2],
                amp[4]));
    const double secs = t.seconds();
    o.check(secs < 1.0, fmt("runtime %.3f s < 1 s", secs));
    return o;
}

double empty_cavity_photons(double g, int cutoff) {
    ModelParams p;
    p.delta_c = 0.0;
    p.delta_a = 5.0;
    p.lambda = 0.0;
    p.g_drive = g;
    p.kappa = 0.5;
    p.n_atoms = 1;
    const auto l = quantum::build_liouvillian(p, {1, cutoff});
    return quantum::mean_photon(quantum::steady_state(l));
}

double empty_cavity_prediction(double g) {
    const double k = 0.5;
    return k / (4 * (k + 2 * g)) + k / (4 * (k - 2 * g)) - 0.5;
}

Outcome c6() {
    Outcome o;
    Timer t;
    for (double g : {0.05, 0.1, 0.2}) {
        const double q = empty_cavity_photons(g, 40), lin = empty_cavity_prediction(g);
        o.check(std::abs(q - lin) < 1e-6,
                fmt("G=%.2f cutoff 40: quantum %.12f, linear %.12f, |diff| %.3g", g, q, lin, std::abs(q - lin)));
    }
    const double secs = t.seconds();
    o.check(secs < 30.0, fmt("runtime %.3f s < 30 s", secs));
    for (int cutoff : {50, 60}) {
        const double q = empty_cavity_photons(0.2, cutoff);
        o.info(fmt("G=0.20 cutoff %d: |diff| %.3g", cutoff, std::abs(q - empty_cavity_prediction(0.2))));
    }
    return o;
}

struct CurveShape {
    bool monotone{true};
    bool smooth{true};
    double max_slope{0.0};
};

CurveShape shape(const std::vector<double>& g, const std::vector<double>& n) {
    CurveShape s;
    double max_step = 0.0, max_curv = 0.0;
    for (std::size_t i = 1; i < n.size(); ++i) {
        const double d = n[i] - n[i - 1];
        if (d < -1e-12) s.monotone = false;
        max_step = std::max(max_step, std::abs(d));
        s.max_slope = std::max(s.max_slope, d / (g[i] - g[i - 1]));
        if (i + 1 < n.size()) max_curv = std::max(max_curv, std::abs(n[i + 1] - 2 * n[i] + n[i - 1]));
    }
    // no kink: neighbouring increments differ by less than half the largest increment
    s.smooth = max_curv < 0.5 * max_step;
    return s;
}

std::pair<std::vector<double>, std::vector<double>> photon_curve(const SweepConfig& cfg, Outcome& o) {
    const auto r = run_sweep(cfg, default_workers());
    o.check(r.failures == 0, fmt("%s: %zu points, %zu failed", cfg.name.c_str(), r.table.rows.size(), r.failures));
    std::vector<double> g, n;
    const int cg = r.table.column("g_drive"), cn = r.table.column("mean_photon");
    for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
        g.push_back(r.table.number(i, cg));
        n.push_back(r.table.number(i, cn));
    }
    return {g, n};
}

fs::path source_dir() { return fs::path(SRLAB_SOURCE_DIR); }

Outcome fig5_shapes(const fs::path& dir, double time_limit) {
    Outcome o;
    Timer t;
    const auto a = load_config((dir / "fig5a_quantum_curve.cfg").string());
    const auto b = load_config((dir / "fig5b_quantum_curve.cfg").string());
    o.info(fmt("N=%d, cutoff %d, gamma=%g, G in [%g, %g], %d points", a.params.n_atoms, a.fock_cutoff, a.params.gamma,
               a.axes[0].min, a.axes[0].max, a.axes[0].points));
    const auto [ga, na] = photon_curve(a, o);
    const auto [gb, nb] = photon_curve(b, o);
    const auto sa = shape(ga, na), sb = shape(gb, nb);
    o.check(sa.monotone && sa.smooth, fmt("lambda=4.5 curve monotone=%d smooth=%d, <a+a> from %.4g to %.4g",
                                          sa.monotone, sa.smooth, na.front(), na.back()));
    o.check(sb.max_slope >= 5.0 * sa.max_slope,
            fmt("max slope lambda=7: %.4f, lambda=4.5: %.4f, ratio %.3f (need >= 5)", sb.max_slope, sa.max_slope,
                sb.max_slope / sa.max_slope));
    o.info(fmt("lambda=7 curve monotone=%d smooth=%d, <a+a> from %.4g to %.4g", sb.monotone, sb.smooth, nb.front(),
               nb.back()));
    if (time_limit > 0) {
        const double secs = t.seconds();
        o.check(secs < time_limit, fmt("runtime %.1f s < %.0f s", secs, time_limit));
    }
    return o;
}

Outcome c7() { return fig5_shapes(source_dir() / "configs", 0.0); }

Outcome c8() {
    Outcome o;
    using namespace quantum;
    CMat vac = CMat::Zero(11, 11);
    vac(0, 0) = 1.0;
    const auto gv = wigner(vac);
    o.check(std::abs(gv.w.maxCoeff() - 2.0 / M_PI) < 1e-3 && gv.local_maxima().size() == 1,
            fmt("vacuum: W max %.6f (2/pi = %.6f), peaks %zu, integral %.6f", gv.w.maxCoeff(), 2.0 / M_PI,
                gv.local_maxima().size(), gv.integral()));
    bool integrals = std::abs(gv.integral() - 1.0) < 1e-2;
    const auto rendered = render_wigner(gv);
    const srlab::detail::Frame f;
    o.check(rendered.at(f.left + f.width / 2, f.top + f.height / 2) == colormap::diverging(1.0),
            "vacuum render: darkest pixel at the origin");

    const std::vector<std::pair<std::string, std::size_t>> cases{
        {"fig5_wigner_regime1.cfg", 1}, {"fig5_wigner_regime2.cfg", 2}, {"fig5_wigner_regime3.cfg", 3}};
    for (const auto& [file, want] : cases) {
        const auto cfg = load_config((source_dir() / "configs" / file).string());
        const auto r = run_sweep(cfg, 1);
        if (r.failures || !r.wigner[0]) {
            o.check(false, file + ": " + r.table.text(0, r.table.column("error")));
            continue;
        }
        const auto& g = *r.wigner[0];
        const auto peaks = g.local_maxima().size();
        integrals = integrals && std::abs(g.integral() - 1.0) < 1e-2;
        const auto& p = cfg.params;
        o.check(peaks == want, fmt("N=%d cutoff %d lambda=%g G=%g: %zu local maxima (want %zu), integral %.6f",
                                   p.n_atoms, cfg.fock_cutoff, p.lambda, p.g_drive, peaks, want, g.integral()));
    }
    o.check(integrals, "all Wigner grids integrate to 1 +- 1e-2");
    return o;
}

struct RunFiles {
    std::map<std::string, std::string> bytes;
};

RunFiles run_to_dir(const SweepConfig& cfg, int workers, const fs::path& dir) {
    fs::remove_all(dir);
    const auto r = run_sweep(cfg, workers);
    auto files = write_data(r, dir);
    for (auto& f : write_images(render(r), dir)) files.push_back(f);
    files.push_back(write_sidecar(r, dir, files));
    RunFiles out;
    for (const auto& f : files) {
        std::ifstream in(dir / f, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out.bytes[f] = ss.str();
    }
    return out;
}

// Every shipped desk-scale config, run end-to-end with 4 and with 1 workers, then a
// repeat of one config.
Outcome c9() {
    Outcome o;
    const auto tmp = fs::temp_directory_path() / ("srlab_acceptance_" + std::to_string(::getpid()));
    std::vector<fs::path> cfgs;
    for (const auto& e : fs::directory_iterator(source_dir() / "configs"))
        if (e.path().extension() == ".cfg") cfgs.push_back(e.path());
    std::sort(cfgs.begin(), cfgs.end());
    int identical = 0;
    for (const auto& path : cfgs) {
        Timer t;
        const auto cfg = load_config(path.string());
        const auto a = run_to_dir(cfg, 4, tmp / "w4");
        const auto b = run_to_dir(cfg, 1, tmp / "w1");
        bool same = a.bytes.size() == b.bytes.size();
        std::size_t csv = 0;
        for (const auto& [name, data] : a.bytes) {
            const auto it = b.bytes.find(name);
            same = same && it != b.bytes.end() && it->second == data;
            if (name.ends_with(".csv")) ++csv;
        }
        if (same) ++identical;
        o.check(same, fmt("%s: %zu files (%zu CSV) identical across workers 4/1, %.1f s", path.filename().c_str(),
                          a.bytes.size(), csv, t.seconds()));
    }
    const auto cfg = load_config((source_dir() / "configs" / "fig2_meanfield_map.cfg").string());
    const auto x = run_to_dir(cfg, 4, tmp / "r1"), y = run_to_dir(cfg, 4, tmp / "r2");
    o.check(x.bytes == y.bytes, "fig2_meanfield_map.cfg: repeated run byte-identical");
    fs::remove_all(tmp);
    o.check(identical == static_cast<int>(cfgs.size()) && !cfgs.empty(),
            fmt("%d of %zu shipped configs byte-identical", identical, cfgs.size()));
    return o;
}

Outcome full_scale() {
    // N=4, cutoff 50 curves from configs/full
    return fig5_shapes(source_dir() / "configs" / "full", 1800.0);
}

bool report(const std::string& id, const std::function<Outcome()>& fn) {
    Outcome o;
    Timer t;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o.check(false, std::string("exception: ") + e.what());
    }
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << fmt(" (%.2f s)", t.seconds()) << "\n";
    std::cout.flush();
    return o.pass;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
        {"1", c1}, {"2", c2}, {"3", c3}, {"4", c4}, {"5", c5}, {"6", c6}, {"7", c7}, {"8", c8}, {"9", c9}};
    const std::string which = argc > 1 ? argv[1] : "all";
    if (which == "full") return report("7 (full scale)", full_scale) ? 0 : 1;
    bool ok = true, found = false;
    for (const auto& [id, fn] : all)
        if (which == "all" || which == id) {
            found = true;
            ok = report(id, fn) && ok;
        }
    if (!found) {
        std::cerr << "usage: acceptance <1..9|full|all>\n";
        return 2;
    }
    return ok ? 0 : 1;
}
