// Command-line front end: run, validate, phases, info.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "ciphase/experiment.hpp"
#include "ciphase/validate.hpp"

namespace {

ciphase::RunConfig load_config(const std::string& file, const std::vector<std::string>& sets,
                               bool full) {
    ciphase::RunConfig cfg;
    if (!file.empty()) {
        std::ifstream is(file);
        if (!is) throw std::runtime_error("cannot open config file " + file);
        cfg = ciphase::parse_config(is);
    }
    if (full) cfg.apply_full_fidelity();
    for (const auto& kv : sets) ciphase::apply_override(cfg, kv);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometric phases of nuclear wavepackets near a conical intersection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ciphase::version_string));

    std::string config_file, out_dir;
    std::vector<std::string> sets;
    bool full = false, quiet = false;
    auto* run = app.add_subcommand("run", "propagate one configuration and record phases");
    run->add_option("-c,--config", config_file, "configuration file (key = value lines)");
    run->add_option("--set", sets, "override a configuration key, key=value");
    run->add_flag("--full-fidelity", full, "1024x1024 grid and dt = 0.1 au");
    run->add_option("-o,--output", out_dir, "output directory (overrides output_dir)");
    run->add_flag("-q,--quiet", quiet, "no progress output");

    std::string suite;
    auto* val = app.add_subcommand("validate", "run a built-in numerical check");
    val->add_option("suite", suite, "bloch, vortex, propagation or gauge")
        ->required()
        ->check(CLI::IsMember({"bloch", "vortex", "propagation", "gauge"}));

    std::string run_dir;
    auto* ph = app.add_subcommand("phases", "recompute phases from a run's snapshots");
    ph->add_option("dir", run_dir, "run directory")->required()->check(CLI::ExistingDirectory);

    auto* info = app.add_subcommand("info", "print the configuration keys or a run's manifest");
    info->add_option("dir", run_dir, "run directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            ciphase::RunConfig cfg = load_config(config_file, sets, full);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            ciphase::RunOptions opts;
            opts.keep_path_history = false;
            if (!quiet)
                opts.progress = [](const ciphase::SampleDiagnostics& d) {
                    if (std::fmod(d.t_fs + 1e-9, 10.0) < 0.5)
                        std::cerr << "t = " << d.t_fs << " fs  norm = " << d.norm
                                  << "  E = " << d.energy << "  path points = " << d.path_points << '\n';
                };
            const auto res = ciphase::run(cfg, opts);
            const auto& last = res.phases().back();
            std::cout << "wrote " << cfg.output_dir << "\nfinal t = " << last.t_fs
                      << " fs  gamma_el = " << last.gamma_el
                      << "  gamma_el_pancharatnam = " << last.gamma_el_pancharatnam
                      << "  valid = " << last.valid() << '\n';
        } else if (*val) {
            const auto report = ciphase::validate_suite(suite);
            for (const auto& c : report.checks)
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  value = " << c.value
                          << "  limit = " << c.limit << '\n';
            return report.pass() ? 0 : 1;
        } else if (*ph) {
            const auto rows = ciphase::recompute_phases(run_dir);
            std::cout << ciphase::io::phase_table_header << '\n' << std::setprecision(10);
            for (const auto& r : rows)
                std::cout << r.t_fs << '\t' << r.gamma_n << '\t' << r.gamma_el << '\t'
                          << r.gamma_el_pancharatnam << '\t' << r.theta_ab << '\t' << r.n_a << '\t'
                          << r.n_b << '\t' << int(r.valid()) << '\t' << int(r.theta_valid) << '\t'
                          << int(r.gamma_n_valid) << '\t' << int(r.pancharatnam_valid) << '\t'
                          << int(r.path_valid) << '\t' << r.min_overlap << '\n';
        } else if (*info) {
            if (run_dir.empty()) {
                for (const auto& k : ciphase::config_keys())
                    std::cout << k.key << " [" << k.unit << "]  " << k.help << "  (default "
                              << k.get(ciphase::RunConfig{}) << ")\n";
            } else {
                std::ifstream is(std::filesystem::path(run_dir) / "manifest.json");
                if (!is) throw std::runtime_error("no manifest.json in " + run_dir);
                std::cout << nlohmann::json::parse(is).dump(2) << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
