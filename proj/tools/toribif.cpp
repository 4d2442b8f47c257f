// toribif: bifurcation analysis of the periodically forced delayed-feedback
// oscillator.  Scenarios are described by a JSON config; see README.md.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "toribif/errors.hpp"
#include "toribif/parallel.hpp"
#include "toribif/scenarios.hpp"
#include "toribif/version.hpp"

namespace {

int read_config(const std::string& path, nlohmann::json& cfg, std::string& err) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        err = "cannot read config file " + path;
        return 2;
    }
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        err = std::string("config is not valid JSON: ") + e.what();
        return 2;
    }
    return 0;
}

int worker_count(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("TORIBIF_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return toribif::default_workers();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"toribif " TORIBIF_VERSION
                 " - resonance tongues, Floquet spectra and folding tori of a forced delay oscillator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    int workers_flag = 0;

    CLI::App* run = app.add_subcommand("run", "execute a scenario config");
    run->add_option("config", config_path, "JSON scenario config")->required();
    run->add_option("--out", out_dir, "output directory (default: current)");
    run->add_option("--workers", workers_flag, "worker threads (default: TORIBIF_WORKERS or hardware)");

    std::string val_path;
    CLI::App* val = app.add_subcommand("validate", "check a scenario config");
    val->add_option("config", val_path, "JSON scenario config")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        nlohmann::json cfg;
        std::string err;
        if (read_config(config_path, cfg, err)) {
            std::cerr << err << "\nusage: toribif run <config.json> [--out DIR] [--workers N]\n";
            return 2;
        }
        const auto diags = toribif::validate_scenario(cfg);
        if (!diags.empty()) {
            for (const auto& d : diags) std::cerr << "config: " << d << "\n";
            return 2;
        }
        try {
            const auto outputs = toribif::run_scenario(cfg, out_dir, worker_count(workers_flag));
            for (const auto& f : outputs) std::cout << f << "\n";
        } catch (const toribif::Error& e) {
            std::cerr << "toribif: " << e.what() << "\n";
            return 1;
        }
        return 0;
    }

    nlohmann::json cfg;
    std::string err;
    if (read_config(val_path, cfg, err)) {
        std::cerr << err << "\nusage: toribif validate <config.json>\n";
        return 2;
    }
    const auto diags = toribif::validate_scenario(cfg);
    for (const auto& d : diags) std::cout << d << "\n";
    return diags.empty() ? 0 : 2;
}
