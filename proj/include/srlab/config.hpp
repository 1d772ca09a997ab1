// config.hpp: Sweep configuration: key = value lines grouped under [section] headers
//
//   [run]     mode, name, workers
//   [params]  delta (sets delta_c and delta_a), delta_c, delta_a, lambda, g_drive, kappa, gamma, n_atoms
//   [axis1]   name, min, max, points        (also [axis2])
//   [quantum] fock_cutoff, convergence_check
//   [wigner]  x_min, x_max, p_min, p_max, nx, np
//   [solver]  newton_tolerance, newton_max_iterations, steady_residual_tol, steady_fallback_time
//   [output]  dir, json, render
//
// '#' and ';' start comments. Unknown sections or keys are errors.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "srlab/errors.hpp"
#include "srlab/meanfield.hpp"
#include "srlab/model.hpp"
#include "srlab/quantum.hpp"

namespace srlab {

enum class Mode { MeanfieldMap, FluctuationMap, StabilityMap, SwitchingCurve, QuantumCurve, LambdaSweep, Wigner };

inline const std::vector<std::pair<std::string, Mode>>& mode_names() {
    static const std::vector<std::pair<std::string, Mode>> names{
        {"meanfield-map", Mode::MeanfieldMap},     {"fluctuation-map", Mode::FluctuationMap},
        {"stability-map", Mode::StabilityMap},     {"switching-curve", Mode::SwitchingCurve},
        {"quantum-curve", Mode::QuantumCurve},     {"lambda-sweep", Mode::LambdaSweep},
        {"wigner", Mode::Wigner}};
    return names;
}

inline std::string to_string(Mode m) {
    for (const auto& [name, mode] : mode_names())
        if (mode == m) return name;
    return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
    for (const auto& [name, mode] : mode_names())
        if (name == s) return mode;
    return std::nullopt;
}

inline bool is_meanfield_mode(Mode m) {
    return m == Mode::MeanfieldMap || m == Mode::FluctuationMap || m == Mode::StabilityMap ||
           m == Mode::SwitchingCurve;
}

inline bool is_quantum_mode(Mode m) { return m == Mode::QuantumCurve || m == Mode::LambdaSweep || m == Mode::Wigner; }

struct AxisSpec {
    std::string name;
    double min{0.0};
    double max{0.0};
    int points{0};

    double value(int i) const { return points == 1 ? min : min + (max - min) * i / (points - 1); }
    std::vector<double> values() const {
        std::vector<double> v(points);
        for (int i = 0; i < points; ++i) v[i] = value(i);
        return v;
    }
};

inline const std::vector<std::string>& axis_names() {
    static const std::vector<std::string> names{"lambda", "g_drive", "delta", "kappa", "n_atoms"};
    return names;
}

// Sets one swept parameter on p.
inline void apply_axis(ModelParams& p, const std::string& name, double v) {
    if (name == "lambda") p.lambda = v;
    else if (name == "g_drive") p.g_drive = v;
    else if (name == "delta") p.delta_c = p.delta_a = v;
    else if (name == "kappa") p.kappa = v;
    else if (name == "n_atoms") p.n_atoms = static_cast<int>(std::lround(v));
    else throw ConfigError("unknown axis '" + name + "'");
}

struct SolverSettings {
    NewtonOptions newton;
    quantum::SteadyStateOptions steady;
};

struct SweepConfig {
    Mode mode{Mode::MeanfieldMap};
    std::string name{"sweep"};
    ModelParams params;
    std::vector<AxisSpec> axes;
    int fock_cutoff{30};
    bool convergence_check{false};
    quantum::WignerGridSpec wigner;
    SolverSettings solver;
    std::string out_dir{"."};
    bool json{true};
    bool render{true};
    int workers{0}; // 0: SRLAB_WORKERS or hardware concurrency
    std::string source; // raw text, echoed into the JSON sidecar

    std::size_t grid_size() const {
        std::size_t n = 1;
        for (const auto& a : axes) n *= static_cast<std::size_t>(a.points);
        return n;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, const std::string& key, int line) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end || !std::isfinite(out))
        throw ConfigError("'" + key + "' expects a number, got '" + v + "'", line);
    return out;
}

inline int parse_int(const std::string& v, const std::string& key, int line) {
    int out = 0;
    const char* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'", line);
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key, int line) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + v + "'", line);
}

// Allowed number of axes per mode.
inline std::pair<int, int> axis_range(Mode m) {
    switch (m) {
    case Mode::MeanfieldMap:
    case Mode::StabilityMap: return {2, 2};
    case Mode::FluctuationMap: return {1, 2};
    case Mode::SwitchingCurve: return {1, 1};
    case Mode::QuantumCurve:
    case Mode::LambdaSweep: return {1, 2};
    case Mode::Wigner: return {0, 2};
    }
    return {0, 0};
}

} // namespace detail

// Parses configuration text. mode_override (from the command line) wins over [run] mode
// but they must agree when both are given.
inline SweepConfig parse_config(const std::string& text, std::optional<Mode> mode_override = std::nullopt) {
    SweepConfig cfg;
    cfg.source = text;
    std::optional<Mode> file_mode;
    int mode_line = 0;
    std::map<int, AxisSpec> axes;
    std::map<int, int> axis_line;
    std::map<std::string, int> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
            section = detail::trim(s.substr(1, s.size() - 2));
            static const std::vector<std::string> known{"run", "params", "axis1", "axis2", "quantum",
                                                        "wigner", "solver", "output"};
            if (std::find(known.begin(), known.end(), section) == known.end())
                throw ConfigError("unknown section [" + section + "]", line);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + s + "'", line);
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (section.empty()) throw ConfigError("'" + key + "' appears before any [section]", line);
        if (key.empty() || val.empty()) throw ConfigError("empty key or value", line);
        const std::string full = section + "." + key;
        if (seen.count(full)) throw ConfigError("duplicate key '" + full + "' (first on line " +
                                                    std::to_string(seen[full]) + ")", line);
        seen[full] = line;
        auto num = [&] { return detail::parse_double(val, full, line); };
        auto integer = [&] { return detail::parse_int(val, full, line); };
        auto boolean = [&] { return detail::parse_bool(val, full, line); };
        auto unknown = [&] { throw ConfigError("unknown key '" + key + "' in [" + section + "]", line); };

        if (section == "run") {
            if (key == "mode") {
                file_mode = parse_mode(val);
                if (!file_mode) throw ConfigError("unknown mode '" + val + "'", line);
                mode_line = line;
            } else if (key == "name") {
                if (val.find_first_of("/\\") != std::string::npos)
                    throw ConfigError("run.name must not contain path separators", line);
                cfg.name = val;
            } else if (key == "workers") {
                cfg.workers = integer();
                if (cfg.workers < 0) throw ConfigError("run.workers must be >= 0", line);
            } else unknown();
        } else if (section == "params") {
            ModelParams& p = cfg.params;
            if (key == "delta") p.delta_c = p.delta_a = num();
            else if (key == "delta_c") p.delta_c = num();
            else if (key == "delta_a") p.delta_a = num();
            else if (key == "lambda") p.lambda = num();
            else if (key == "g_drive") p.g_drive = num();
            else if (key == "kappa") p.kappa = num();
            else if (key == "gamma") p.gamma = num();
            else if (key == "n_atoms") p.n_atoms = integer();
            else unknown();
        } else if (section == "axis1" || section == "axis2") {
            const int idx = section == "axis1" ? 0 : 1;
            AxisSpec& a = axes[idx];
            axis_line.emplace(idx, line);
            if (key == "name") {
                if (std::find(axis_names().begin(), axis_names().end(), val) == axis_names().end())
                    throw ConfigError("axis name must be one of lambda, g_drive, delta, kappa, n_atoms; got '" + val +
                                          "'", line);
                a.name = val;
            } else if (key == "min") a.min = num();
            else if (key == "max") a.max = num();
            else if (key == "points") {
                a.points = integer();
                if (a.points < 2) throw ConfigError(full + " must be >= 2", line);
            } else unknown();
        } else if (section == "quantum") {
            if (key == "fock_cutoff") cfg.fock_cutoff = integer();
            else if (key == "convergence_check") cfg.convergence_check = boolean();
            else unknown();
        } else if (section == "wigner") {
            auto& w = cfg.wigner;
            if (key == "x_min") w.x_min = num();
            else if (key == "x_max") w.x_max = num();
            else if (key == "p_min") w.p_min = num();
            else if (key == "p_max") w.p_max = num();
            else if (key == "nx") w.nx = integer();
            else if (key == "np") w.np = integer();
            else unknown();
        } else if (section == "solver") {
            if (key == "newton_tolerance") cfg.solver.newton.tolerance = num();
            else if (key == "newton_max_iterations") cfg.solver.newton.max_iterations = integer();
            else if (key == "steady_residual_tol") cfg.solver.steady.residual_tol = num();
            else if (key == "steady_fallback_time") cfg.solver.steady.fallback_time = num();
            else unknown();
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = val;
            else if (key == "json") cfg.json = boolean();
            else if (key == "render") cfg.render = boolean();
            else unknown();
        }
    }

    if (mode_override && file_mode && *mode_override != *file_mode)
        throw ConfigError("config mode '" + to_string(*file_mode) + "' conflicts with requested mode '" +
                              to_string(*mode_override) + "'", mode_line);
    if (!mode_override && !file_mode) throw ConfigError("no mode given ([run] mode or command line)");
    cfg.mode = mode_override ? *mode_override : *file_mode;

    if (axes.count(1) && !axes.count(0)) throw ConfigError("[axis2] given without [axis1]", axis_line[1]);
    for (auto& [idx, a] : axes) {
        const int l = axis_line[idx];
        if (a.name.empty()) throw ConfigError("axis" + std::to_string(idx + 1) + " has no name", l);
        if (a.points < 2) throw ConfigError("axis" + std::to_string(idx + 1) + " needs points >= 2", l);
        if (a.name == "n_atoms") {
            if (a.min != std::round(a.min) || a.max != std::round(a.max) || a.min < 1 ||
                std::fmod(a.max - a.min, a.points - 1) != 0.0)
                throw ConfigError("n_atoms axis must step through integers >= 1", l);
        }
        cfg.axes.push_back(a);
    }
    if (cfg.axes.size() == 2 && cfg.axes[0].name == cfg.axes[1].name)
        throw ConfigError("both axes sweep '" + cfg.axes[0].name + "'", axis_line[1]);

    const auto [lo, hi] = detail::axis_range(cfg.mode);
    const int n = static_cast<int>(cfg.axes.size());
    if (n < lo || n > hi)
        throw ConfigError("mode " + to_string(cfg.mode) + " takes " +
                          (lo == hi ? std::to_string(lo) : std::to_string(lo) + " to " + std::to_string(hi)) +
                          " axes, got " + std::to_string(n));
    if (cfg.mode == Mode::LambdaSweep && cfg.axes[0].name != "lambda")
        throw ConfigError("lambda-sweep needs axis1 name = lambda", axis_line[0]);
    if (is_meanfield_mode(cfg.mode))
        for (const auto& a : cfg.axes)
            if (a.name == "n_atoms") throw ConfigError("n_atoms cannot be swept in mean-field modes");
    if (cfg.fock_cutoff < 1) throw ConfigError("quantum.fock_cutoff must be >= 1", seen["quantum.fock_cutoff"]);
    if (cfg.wigner.nx < 2 || cfg.wigner.np < 2) throw ConfigError("wigner grid needs nx, np >= 2");
    if (!(cfg.wigner.x_max > cfg.wigner.x_min) || !(cfg.wigner.p_max > cfg.wigner.p_min))
        throw ConfigError("wigner grid needs x_max > x_min and p_max > p_min");
    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[params]: ") + e.what());
    }
    return cfg;
}

inline SweepConfig load_config(const std::string& path, std::optional<Mode> mode_override = std::nullopt) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    try {
        return parse_config(ss.str(), mode_override);
    } catch (const ConfigError& e) {
        ConfigError located(path + ": " + e.what());
        located.line = e.line;
        throw located;
    }
}

} // namespace srlab
