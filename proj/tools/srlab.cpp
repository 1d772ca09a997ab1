// srlab: parameter sweeps over the driven Dicke model, mean-field and quantum

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "srlab/render.hpp"
#include "srlab/sweep.hpp"

namespace {

std::optional<int> env_workers() {
    const char* s = std::getenv("SRLAB_WORKERS");
    if (!s || !*s) return std::nullopt;
    try {
        std::size_t pos = 0;
        const int n = std::stoi(s, &pos);
        if (pos != std::string(s).size() || n < 1) throw std::invalid_argument(s);
        return n;
    } catch (const std::exception&) {
        throw srlab::ConfigError(std::string("SRLAB_WORKERS must be a positive integer, got '") + s + "'");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"srlab: superradiance sweeps for the coherently driven Dicke model"};
    std::string mode, config, out;
    int workers = 0;
    bool no_render = false;
    std::vector<std::string> modes;
    for (const auto& m : srlab::mode_names()) modes.push_back(m.first);
    app.add_option("mode", mode, "Sweep mode")->required()->check(CLI::IsMember(modes));
    app.add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "Output directory (overrides [output] dir)");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--no-render", no_render, "Skip PNG output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        auto cfg = srlab::load_config(config, srlab::parse_mode(mode));
        if (!out.empty()) cfg.out_dir = out;
        if (no_render) cfg.render = false;
        int n = workers;
        if (n == 0) n = env_workers().value_or(cfg.workers);
        if (n == 0) n = srlab::default_workers();

        const auto res = srlab::run_sweep(cfg, n);
        auto files = srlab::write_data(res, cfg.out_dir);
        if (cfg.render)
            for (auto& f : srlab::write_images(srlab::render(res), cfg.out_dir)) files.push_back(f);
        if (cfg.json) files.push_back(srlab::write_sidecar(res, cfg.out_dir, files));

        std::cout << cfg.name << ": " << res.table.rows.size() << " points, " << res.failures << " failed, "
                  << n << " workers\n";
        for (const auto& f : files) std::cout << "  " << (std::filesystem::path(cfg.out_dir) / f).string() << "\n";
        if (res.failures > 0) {
            const int err = res.table.column("error");
            for (std::size_t r = 0; r < res.table.rows.size(); ++r)
                if (const auto& msg = res.table.text(r, err); !msg.empty())
                    std::cerr << "point " << r << ": " << msg << "\n";
            return 2;
        }
        return 0;
    } catch (const srlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
