// sweep.hpp: Grid sweeps over the mean-field and master-equation solvers, with CSV/JSON export
//
// Grid points are flattened row-major (axis1 outer, axis2 inner) and evaluated in parallel
// into pre-indexed slots, so tables do not depend on the worker count.

#pragma once

#include <json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "srlab/config.hpp"
#include "srlab/fluctuations.hpp"
#include "srlab/meanfield.hpp"
#include "srlab/parallel.hpp"
#include "srlab/quantum.hpp"

namespace srlab {

using Cell = std::variant<double, std::int64_t, std::string>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        throw SchemaMismatch("table has no column '" + name + "'");
    }
    double number(std::size_t row, int col) const {
        const Cell& c = rows.at(row).at(static_cast<std::size_t>(col));
        if (const auto* d = std::get_if<double>(&c)) return *d;
        if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
        throw SchemaMismatch("column '" + columns[static_cast<std::size_t>(col)] + "' is not numeric");
    }
    const std::string& text(std::size_t row, int col) const {
        const Cell& c = rows.at(row).at(static_cast<std::size_t>(col));
        if (const auto* s = std::get_if<std::string>(&c)) return *s;
        throw SchemaMismatch("column '" + columns[static_cast<std::size_t>(col)] + "' is not text");
    }
};

struct SweepResult {
    SweepConfig config;
    ResultTable table;
    std::vector<std::optional<quantum::WignerGrid>> wigner; // wigner mode only, one per row
    std::size_t failures{0};
};

// Per-branch mean-field columns, in this order for every branch in kAllBranches.
inline const std::vector<std::string>& branch_fields() {
    static const std::vector<std::string> f{"exists", "alpha_re", "alpha_im", "z", "stable", "max_re", "fluct"};
    return f;
}

inline std::vector<std::string> schema(const SweepConfig& cfg) {
    std::vector<std::string> cols;
    for (const auto& a : cfg.axes) cols.push_back(a.name);
    if (is_meanfield_mode(cfg.mode)) {
        for (const char* c : {"phase", "stable_count", "marginal_count"}) cols.emplace_back(c);
        for (Branch b : kAllBranches)
            for (const auto& f : branch_fields()) cols.push_back(to_string(b) + "_" + f);
    } else if (cfg.mode == Mode::Wigner) {
        for (const char* c : {"n_atoms", "fock_cutoff", "mean_photon", "peaks", "w_max", "w_min", "integral",
                              "cutoff_leak", "grid_file"})
            cols.emplace_back(c);
    } else {
        for (const char* c : {"n_atoms", "fock_cutoff", "mean_photon", "spin_x", "spin_y", "spin_z", "trace_err",
                              "herm_err", "min_eig", "residual", "cutoff_leak", "cutoff_rel_diff"})
            cols.emplace_back(c);
    }
    cols.emplace_back("error");
    return cols;
}

// Parameters and axis values at flat grid index idx.
inline ModelParams point_params(const SweepConfig& cfg, std::size_t idx, std::vector<double>* axis_values = nullptr) {
    ModelParams p = cfg.params;
    std::size_t stride = cfg.grid_size();
    std::size_t rem = idx;
    for (const auto& a : cfg.axes) {
        stride /= static_cast<std::size_t>(a.points);
        const int i = static_cast<int>(rem / stride);
        rem %= stride;
        const double v = a.value(i);
        apply_axis(p, a.name, v);
        if (axis_values) axis_values->push_back(v);
    }
    return p;
}

inline std::string wigner_grid_file(const SweepConfig& cfg, std::size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_wigner_%04zu.csv", idx);
    return cfg.name + buf;
}

namespace detail {

inline std::vector<Cell> meanfield_row(const SweepConfig& cfg, std::size_t idx) {
    std::vector<double> ax;
    const ModelParams p = point_params(cfg, idx, &ax);
    std::vector<Cell> row(ax.begin(), ax.end());
    std::vector<Cell> branch_cells;
    std::string error;
    PhaseLabel label;
    try {
        p.validate();
        const auto fps = fixed_points(p, cfg.solver.newton);
        label = classify_fixed_points(fps);
        for (Branch b : kAllBranches) {
            const FixedPoint* fp = nullptr;
            for (const auto& f : fps)
                if (f.branch == b) fp = &f;
            if (!fp) {
                branch_cells.insert(branch_cells.end(),
                                    {std::int64_t{0}, kNaN, kNaN, kNaN, std::int64_t{0}, kNaN, kNaN});
                continue;
            }
            double fl = kNaN;
            if (fp->stable) {
                try {
                    fl = fluctuation_at(*fp, p).photon_fluctuation;
                } catch (const std::exception& e) {
                    if (error.empty()) error = to_string(b) + ": " + e.what();
                }
            }
            branch_cells.insert(branch_cells.end(),
                                {std::int64_t{1}, fp->state.alpha_re, fp->state.alpha_im, fp->state.z,
                                 std::int64_t{fp->stable ? 1 : 0}, fp->max_real_part, fl});
        }
        row.emplace_back(to_string(label.phase));
        row.emplace_back(std::int64_t{label.stable_count});
        row.emplace_back(std::int64_t{label.marginal_count});
    } catch (const std::exception& e) {
        error = e.what();
        row.emplace_back(std::string{});
        row.emplace_back(std::int64_t{0});
        row.emplace_back(std::int64_t{0});
        branch_cells.clear();
        for (std::size_t i = 0; i < kAllBranches.size(); ++i)
            branch_cells.insert(branch_cells.end(), {std::int64_t{0}, kNaN, kNaN, kNaN, std::int64_t{0}, kNaN, kNaN});
    }
    row.insert(row.end(), branch_cells.begin(), branch_cells.end());
    row.emplace_back(error);
    return row;
}

inline quantum::HilbertSpec hilbert(const SweepConfig& cfg, const ModelParams& p) {
    return {p.n_atoms, cfg.fock_cutoff};
}

inline std::vector<Cell> quantum_row(const SweepConfig& cfg, std::size_t idx) {
    std::vector<double> ax;
    const ModelParams p = point_params(cfg, idx, &ax);
    std::vector<Cell> row(ax.begin(), ax.end());
    row.emplace_back(std::int64_t{p.n_atoms});
    row.emplace_back(std::int64_t{cfg.fock_cutoff});
    std::vector<Cell> vals(10, kNaN);
    std::string error;
    try {
        const auto spec = hilbert(cfg, p);
        const auto l = quantum::build_liouvillian(p, spec);
        const auto ss = quantum::steady_state(l, cfg.solver.steady);
        const auto s = quantum::collective_spin(ss);
        double rel = kNaN;
        if (cfg.convergence_check) rel = quantum::cutoff_convergence(p, spec, quantum::mean_photon, cfg.solver.steady).relative_difference;
        vals = {quantum::mean_photon(ss),
                s.x,
                s.y,
                s.z,
                std::abs(ss.trace() - quantum::cplx(1.0)),
                ss.hermiticity_error(),
                ss.min_eigenvalue(),
                quantum::liouvillian_residual(l, ss),
                quantum::truncation_leak(quantum::reduced_cavity(ss)),
                rel};
    } catch (const std::exception& e) {
        error = e.what();
    }
    row.insert(row.end(), vals.begin(), vals.end());
    row.emplace_back(error);
    return row;
}

struct WignerOutcome {
    std::vector<Cell> row;
    std::optional<quantum::WignerGrid> grid;
};

inline WignerOutcome wigner_row(const SweepConfig& cfg, std::size_t idx) {
    std::vector<double> ax;
    const ModelParams p = point_params(cfg, idx, &ax);
    WignerOutcome out;
    out.row.assign(ax.begin(), ax.end());
    out.row.emplace_back(std::int64_t{p.n_atoms});
    out.row.emplace_back(std::int64_t{cfg.fock_cutoff});
    std::vector<Cell> vals{kNaN, std::int64_t{0}, kNaN, kNaN, kNaN, kNaN, std::string{}};
    std::string error;
    try {
        const auto l = quantum::build_liouvillian(p, hilbert(cfg, p));
        const auto ss = quantum::steady_state(l, cfg.solver.steady);
        const auto cav = quantum::reduced_cavity(ss);
        vals[5] = quantum::truncation_leak(cav);
        vals[0] = quantum::mean_photon(ss);
        auto g = quantum::wigner(cav, cfg.wigner);
        vals[1] = static_cast<std::int64_t>(g.local_maxima().size());
        vals[2] = g.w.maxCoeff();
        vals[3] = g.w.minCoeff();
        vals[4] = g.integral();
        vals[6] = wigner_grid_file(cfg, idx);
        out.grid = std::move(g);
    } catch (const std::exception& e) {
        error = e.what();
    }
    out.row.insert(out.row.end(), vals.begin(), vals.end());
    out.row.emplace_back(error);
    return out;
}

} // namespace detail

inline SweepResult run_sweep(const SweepConfig& cfg, int workers) {
    SweepResult res;
    res.config = cfg;
    res.table.columns = schema(cfg);
    const std::size_t n = cfg.grid_size();
    if (cfg.mode == Mode::Wigner) {
        auto outs = parallel_map<detail::WignerOutcome>(n, workers, [&](std::size_t i) { return detail::wigner_row(cfg, i); });
        for (auto& o : outs) {
            res.table.rows.push_back(std::move(o.row));
            res.wigner.push_back(std::move(o.grid));
        }
    } else if (is_meanfield_mode(cfg.mode)) {
        res.table.rows =
            parallel_map<std::vector<Cell>>(n, workers, [&](std::size_t i) { return detail::meanfield_row(cfg, i); });
    } else {
        res.table.rows =
            parallel_map<std::vector<Cell>>(n, workers, [&](std::size_t i) { return detail::quantum_row(cfg, i); });
    }
    const int err = res.table.column("error");
    for (std::size_t r = 0; r < res.table.rows.size(); ++r)
        if (!res.table.text(r, err).empty()) ++res.failures;
    return res;
}

// ---- export ----

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0"; // folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

inline std::string to_csv(const ResultTable& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
        out += '\n';
    }
    return out;
}

inline std::string wigner_grid_csv(const quantum::WignerGrid& g) {
    std::string out = "x,p,w\n";
    for (std::size_t i = 0; i < g.xs.size(); ++i)
        for (std::size_t j = 0; j < g.ps.size(); ++j)
            out += format_double(g.xs[i]) + "," + format_double(g.ps[j]) + "," +
                   format_double(g.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) + "\n";
    return out;
}

inline nlohmann::ordered_json sidecar(const SweepResult& r, const std::vector<std::string>& files) {
    const auto& c = r.config;
    nlohmann::ordered_json j;
    j["srlab_version"] = SRLAB_VERSION;
    j["mode"] = to_string(c.mode);
    j["name"] = c.name;
    j["params"] = {{"delta_c", c.params.delta_c}, {"delta_a", c.params.delta_a}, {"lambda", c.params.lambda},
                   {"g_drive", c.params.g_drive}, {"kappa", c.params.kappa},     {"gamma", c.params.gamma},
                   {"n_atoms", c.params.n_atoms}};
    j["axes"] = nlohmann::ordered_json::array();
    for (const auto& a : c.axes)
        j["axes"].push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"points", a.points}});
    if (is_quantum_mode(c.mode)) j["fock_cutoff"] = c.fock_cutoff;
    if (c.mode == Mode::Wigner)
        j["wigner_grid"] = {{"x_min", c.wigner.x_min}, {"x_max", c.wigner.x_max}, {"p_min", c.wigner.p_min},
                            {"p_max", c.wigner.p_max}, {"nx", c.wigner.nx},       {"np", c.wigner.np}};
    j["columns"] = r.table.columns;
    j["rows"] = r.table.rows.size();
    j["failed_points"] = r.failures;
    j["files"] = files;
    j["config_text"] = c.source;
    return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& s) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << s;
    if (!f) throw Error("write failed for '" + path.string() + "'");
}

// Writes <name>.csv and any Wigner grid files into dir. Returns the file names.
inline std::vector<std::string> write_data(const SweepResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto& c = r.config;
    std::vector<std::string> files{c.name + ".csv"};
    write_text(dir / files[0], to_csv(r.table));
    for (std::size_t i = 0; i < r.wigner.size(); ++i)
        if (r.wigner[i]) {
            files.push_back(wigner_grid_file(c, i));
            write_text(dir / files.back(), wigner_grid_csv(*r.wigner[i]));
        }
    return files;
}

// <name>.json listing every output file, itself included.
inline std::string write_sidecar(const SweepResult& r, const std::filesystem::path& dir,
                                 std::vector<std::string> files) {
    const std::string name = r.config.name + ".json";
    files.push_back(name);
    write_text(dir / name, sidecar(r, files).dump(2) + "\n");
    return name;
}

} // namespace srlab
