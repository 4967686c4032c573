#pragma once

// Orchestration of one canonical run (exact or Born-Oppenheimer, case a or
// b): propagation, path advection, per-sample phases, diagnostics and the
// files that record them.

#include <json.hpp>

#include <functional>
#include <iostream>
#include <memory>

#include "ciphase/config.hpp"
#include "ciphase/io.hpp"
#include "ciphase/observables.hpp"
#include "ciphase/path.hpp"
#include "ciphase/phases.hpp"
#include "ciphase/propagator.hpp"
#include "ciphase/version.hpp"

namespace ciphase {

struct SampleDiagnostics {
    double t_au = 0.0;
    double t_fs = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    double edge_ratio = 0.0;
    double nonadiabaticity = 0.0;
    std::size_t path_points = 0;
    Point a{}, b{};
};

struct SnapshotEntry {
    double t_au = 0.0;
    std::string wavefunction_file;
    std::string observable_file;
    double norm = 0.0;
    double energy = 0.0;
};

struct TrackedPath {
    PathSpec spec;
    AdvectedPath path;
    std::vector<PhaseRecord> records;
    std::vector<PhaseRecord> closed_records;
    std::vector<PolylinePath> history;
};

struct RunOptions {
    bool write_files = true;
    bool keep_path_history = true;
    /// Additional paths advected through the same flow (not written to disk).
    std::vector<PathSpec> extra_paths;
    std::function<void(const SampleDiagnostics&)> progress;
};

struct RunResult {
    RunConfig config;
    std::vector<TrackedPath> paths;  // [0] is the configured path
    std::vector<SampleDiagnostics> diagnostics;
    std::vector<SnapshotEntry> snapshots;
    ObservableSet final_observables;
    std::vector<std::string> warnings;

    const std::vector<PhaseRecord>& phases() const { return paths.front().records; }
};

inline AdvectedPath make_path(const PathSpec& spec, const ModelParams& model) {
    const Point c = model.packet_center();
    return make_initial_arc(c, spec.radius_bohr.value_or(norm(c)), spec.half_angle, spec.n_points);
}

inline SpacingBounds spacing_bounds(const PathSpec& spec, const Grid& g) {
    const double h = std::min(g.dx(), g.dy());
    return {spec.min_spacing_dx * h, spec.max_spacing_dx * h, spec.max_deviation_dx * h};
}

namespace detail {

inline double initial_arc_check(const RunConfig& cfg) {
    return cfg.path.radius_bohr.value_or(norm(cfg.model().packet_center()));
}

template <std::size_t NC>
class Tracker {
public:
    Tracker(const RunConfig& cfg, const Propagator<NC>& prop, const RunOptions& opts,
            RunResult& out)
        : cfg_(cfg), model_(cfg.model()), prop_(prop), opts_(opts), out_(out),
          dir_(cfg.output_dir) {
        std::vector<PathSpec> specs{cfg.path};
        specs.insert(specs.end(), opts.extra_paths.begin(), opts.extra_paths.end());
        for (const auto& s : specs) out_.paths.push_back({s, make_path(s, model_), {}, {}, {}});
        snapshot_every_ = cfg.snapshot_every();
        if (opts_.write_files) {
            io::fs::create_directories(dir_ / "snapshots");
            path_file_ = io::detail::open_out(dir_ / "paths.txt", false);
            path_file_ << "# t_fs valid count x0 y0 x1 y1 ...\n";
        }
    }

    void sample(const ComplexField<NC>& psi, std::size_t step, bool last) {
        const double t = static_cast<double>(step) * cfg_.dt_au;
        ObservableSet obs =
            compute_observables(psi, prop_.fft(), model_.mass, model_.hbar, cfg_.density_floor);

        if (sample_index_ > 0) {
            const SnapshotVelocity vel(prev_, t_prev_, obs, t);
            const VelocityFn fn = std::cref(vel);
            const double h = std::min(psi.grid.dx(), psi.grid.dy());
            for (auto& tp : out_.paths) {
                advect_limited(tp.path, fn, t_prev_, t, tp.spec.substeps, tp.spec.max_step_dx * h);
                if (tp.path.size() <= tp.spec.max_points) maintain(tp.path, spacing_bounds(tp.spec, psi.grid));
                if (tp.path.size() > tp.spec.max_points) tp.path.valid = false;
                update_validity(tp.path, psi.grid, obs.mask, tp.spec.invalid_after);
            }
        }

        const PathSampler<NC> sampler(psi, prop_.fft(), cfg_.interp, cfg_.upsample,
                                      cfg_.lagrange_order, model_.hbar);
        const double t_fs = au_to_fs(t);
        for (auto& tp : out_.paths) {
            PhaseRecord r = compute_phase_record(sampler, obs, tp.path.path, cfg_.density_floor);
            r.t_fs = t_fs;
            r.path_valid = tp.path.valid;
            tp.records.push_back(r);
            if (cfg_.closure) {
                PolylinePath closed = tp.path.path;
                closed.closed = true;
                PhaseRecord c = compute_phase_record(sampler, obs, closed, cfg_.density_floor);
                c.t_fs = t_fs;
                c.path_valid = tp.path.valid;
                tp.closed_records.push_back(c);
            }
            if (opts_.keep_path_history) tp.history.push_back(tp.path.path);
        }

        SampleDiagnostics d;
        d.t_au = t;
        d.t_fs = t_fs;
        d.norm = norm_squared(psi);
        d.energy = prop_.energy(psi);
        d.edge_ratio = edge_density_ratio(obs.n);
        d.nonadiabaticity = NC == 2 ? nonadiabaticity(obs) : 0.0;
        d.path_points = out_.paths.front().path.size();
        d.a = out_.paths.front().path.path.a();
        d.b = out_.paths.front().path.path.b();
        if (d.edge_ratio > cfg_.edge_warn && !edge_warned_) {
            edge_warned_ = true;
            std::ostringstream os;
            os << "edge density ratio " << d.edge_ratio << " exceeds " << cfg_.edge_warn
               << " at t = " << t_fs << " fs";
            out_.warnings.push_back(os.str());
            std::cerr << "warning: " << os.str() << '\n';
        }
        out_.diagnostics.push_back(d);
        if (opts_.progress) opts_.progress(d);

        if (opts_.write_files) {
            const auto& main = out_.paths.front();
            io::write_path_line(path_file_, t_fs, main.path.valid, main.path.path);
            const bool periodic = snapshot_every_ > 0 && sample_index_ % snapshot_every_ == 0;
            if (periodic || sample_index_ == 0 || last) {
                char name[32];
                std::snprintf(name, sizeof name, "%06zu", sample_index_);
                SnapshotEntry e{t, "snapshots/psi_" + std::string(name) + ".bin",
                                "snapshots/obs_" + std::string(name) + ".bin", d.norm, d.energy};
                io::write_snapshot(dir_ / e.wavefunction_file, psi, t);
                io::write_observables(dir_ / e.observable_file, obs, t);
                out_.snapshots.push_back(e);
            }
        }

        if (last) out_.final_observables = obs;
        prev_ = std::move(obs);
        t_prev_ = t;
        ++sample_index_;
    }

private:
    const RunConfig& cfg_;
    ModelParams model_;
    const Propagator<NC>& prop_;
    const RunOptions& opts_;
    RunResult& out_;
    io::fs::path dir_;
    std::ofstream path_file_;
    std::size_t snapshot_every_ = 0;
    std::size_t sample_index_ = 0;
    ObservableSet prev_;
    double t_prev_ = 0.0;
    bool edge_warned_ = false;
};

template <std::size_t NC>
void run_impl(const RunConfig& cfg, ComplexField<NC> psi, const Propagator<NC>& prop,
              const RunOptions& opts, RunResult& out) {
    Tracker<NC> tracker(cfg, prop, opts, out);
    const std::size_t n_steps = cfg.n_steps();
    tracker.sample(psi, 0, n_steps == 0);
    const std::size_t stride = cfg.stride_steps();
    const Observer<NC> obs{stride, [&](const ComplexField<NC>& s, std::size_t step) {
                               tracker.sample(s, step, step == n_steps);
                           }};
    propagate<NC>(psi, prop, n_steps, std::span<const Observer<NC>>(&obs, 1), 0,
                  cfg.norm_tolerance);
}

}  // namespace detail

inline nlohmann::json manifest_json(const RunResult& r) {
    using nlohmann::json;
    const RunConfig& c = r.config;
    const ModelParams m = c.model();
    auto sig12 = [](double v) {
        std::ostringstream os;
        os << std::setprecision(12) << v;
        return std::stod(os.str());
    };
    json j;
    j["code_version"] = version_string;
    j["config_text"] = format_config(c);
    j["resolved_atomic_units"] = {
        {"mass", sig12(m.mass)},
        {"omega", sig12(m.omega)},
        {"kappa", sig12(m.kappa)},
        {"hbar", sig12(m.hbar)},
        {"dt", sig12(c.dt_au)},
        {"stride", sig12(c.stride_au())},
        {"stride_steps", c.stride_steps()},
        {"n_steps", c.n_steps()},
        {"t_final", sig12(static_cast<double>(c.n_steps()) * c.dt_au)},
        {"box", sig12(c.box_bohr)},
        {"nx", c.nx},
        {"ny", c.ny},
        {"packet_center", {sig12(m.packet_center().x), sig12(m.packet_center().y)}},
        {"packet_width", sig12(m.packet_width())},
        {"valley_radius", sig12(m.valley_radius())},
        {"path_radius", sig12(detail::initial_arc_check(c))},
        {"density_floor", sig12(c.density_floor)},
    };
    j["mode"] = mode_name(c.mode);
    j["case"] = case_name(c.initial_case);
    json snaps = json::array();
    for (const auto& s : r.snapshots)
        snaps.push_back({{"t_au", s.t_au},
                         {"t_fs", au_to_fs(s.t_au)},
                         {"file", s.wavefunction_file},
                         {"observables", s.observable_file},
                         {"norm", s.norm},
                         {"energy", s.energy}});
    j["snapshots"] = snaps;
    j["phase_table"] = "phases.tsv";
    if (c.closure) j["closed_phase_table"] = "phases_closed.tsv";
    j["path_file"] = "paths.txt";
    j["diagnostics"] = "diagnostics.tsv";
    j["warnings"] = r.warnings;
    return j;
}

inline void write_diagnostics(const io::fs::path& file, const std::vector<SampleDiagnostics>& ds) {
    auto os = io::detail::open_out(file, false);
    os << "t_fs\tt_au\tnorm\tenergy\tedge_ratio\tnonadiabaticity\tpath_points\tax\tay\tbx\tby\n"
       << std::setprecision(17);
    for (const auto& d : ds)
        os << d.t_fs << '\t' << d.t_au << '\t' << d.norm << '\t' << d.energy << '\t' << d.edge_ratio
           << '\t' << d.nonadiabaticity << '\t' << d.path_points << '\t' << d.a.x << '\t' << d.a.y
           << '\t' << d.b.x << '\t' << d.b.y << '\n';
}

/// Executes one run. Throws NormDriftError when the norm drifts past the
/// configured tolerance and io::IoError on file problems.
inline RunResult run(const RunConfig& cfg, const RunOptions& opts = {}) {
    cfg.validate();
    RunResult out;
    out.config = cfg;
    const ModelParams model = cfg.model();
    const Grid grid = cfg.grid();
    const PotentialFields pot = eval_potential(model, grid);
    if (cfg.mode == RunMode::exact) {
        const Propagator<2> prop(pot, model.mass, cfg.dt_au, model.hbar);
        detail::run_impl<2>(cfg, initial_state(cfg.initial_case, model, grid), prop, opts, out);
    } else {
        const Propagator<1> prop(pot.eminus, model.mass, cfg.dt_au, model.hbar);
        detail::run_impl<1>(cfg, initial_state_bo(cfg.initial_case, model, grid), prop, opts, out);
    }
    if (opts.write_files) {
        const io::fs::path dir(cfg.output_dir);
        io::write_phase_table(dir / "phases.tsv", out.phases());
        if (cfg.closure) io::write_phase_table(dir / "phases_closed.tsv", out.paths.front().closed_records);
        write_diagnostics(dir / "diagnostics.tsv", out.diagnostics);
        auto os = io::detail::open_out(dir / "manifest.json", false);
        os << manifest_json(out).dump(2) << '\n';
        auto cs = io::detail::open_out(dir / "config.txt", false);
        cs << format_config(cfg);
    }
    return out;
}

/// Recomputes phase records from the snapshot files and stored paths of a
/// finished run, one record per snapshot.
inline std::vector<PhaseRecord> recompute_phases(const io::fs::path& run_dir) {
    std::ifstream ms(run_dir / "manifest.json");
    if (!ms) throw io::IoError(run_dir / "manifest.json", "cannot open for reading");
    const nlohmann::json j = nlohmann::json::parse(ms);
    const RunConfig cfg = parse_config(j.at("config_text").get<std::string>());
    const ModelParams model = cfg.model();
    const Grid grid = cfg.grid();
    const Fft2d fft(grid);
    const auto paths = io::read_path_file(run_dir / j.at("path_file").get<std::string>());
    std::vector<PhaseRecord> out;
    for (const auto& s : j.at("snapshots")) {
        const double t_fs = au_to_fs(s.at("t_au").get<double>());
        const io::Snapshot snap = io::read_snapshot(run_dir / s.at("file").get<std::string>());
        const io::PathSample* ps = nullptr;
        for (const auto& p : paths)
            if (std::abs(p.t_fs - t_fs) < 1e-9 * std::max(1.0, t_fs)) ps = &p;
        if (!ps) throw io::IoError(run_dir / "paths.txt", "no path stored for t = " + std::to_string(t_fs) + " fs");
        auto compute = [&](const auto& psi) {
            constexpr std::size_t NC = std::remove_cvref_t<decltype(psi)>::components;
            const ObservableSet obs = compute_observables(psi, fft, model.mass, model.hbar, cfg.density_floor);
            const PathSampler<NC> sampler(psi, fft, cfg.interp, cfg.upsample, cfg.lagrange_order, model.hbar);
            PhaseRecord r = compute_phase_record(sampler, obs, ps->path, cfg.density_floor);
            r.t_fs = t_fs;
            r.path_valid = ps->valid;
            return r;
        };
        if (snap.comp.size() == 2) out.push_back(compute(io::to_field<2>(snap, grid)));
        else out.push_back(compute(io::to_field<1>(snap, grid)));
    }
    return out;
}

}  // namespace ciphase
