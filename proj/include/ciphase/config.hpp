#pragma once

// Run configuration and its flat `key = value` text form. Parameters are
// written in laboratory units (amu, cm^-1, fs) and resolved to atomic units
// on use. Unknown keys are rejected.

#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ciphase/fft.hpp"
#include "ciphase/model.hpp"
#include "ciphase/units.hpp"

namespace ciphase {

enum class RunMode { exact, bo };

inline std::string_view mode_name(RunMode m) { return m == RunMode::exact ? "exact" : "bo"; }

inline RunMode parse_mode(std::string_view s) {
    if (s == "exact") return RunMode::exact;
    if (s == "bo") return RunMode::bo;
    throw std::invalid_argument("mode must be 'exact' or 'bo'");
}

struct PathSpec {
    std::optional<double> radius_bohr;  // default: distance of the packet center from the CI
    double half_angle = 0.25;           // rad
    std::size_t n_points = 201;
    double min_spacing_dx = 0.25;  // vertex spacing bounds, in grid spacings
    double max_spacing_dx = 0.5;
    double max_deviation_dx = 0.05;  // largest shift allowed when dropping a vertex
    std::size_t substeps = 4;        // RK4 steps per observer interval
    std::size_t invalid_after = 10;  // consecutive masked samples before the path is invalid
    double max_step_dx = 0.25;       // largest vertex displacement per RK4 step, in grid spacings
    std::size_t max_points = 200000; // beyond this the path is invalid and no longer refined
};

struct RunConfig {
    RunMode mode = RunMode::exact;
    InitialCase initial_case = InitialCase::a;

    double mass_amu = 1.0;
    double omega_cm = 1000.0;
    double kappa_au = 0.1;
    double packet_offset = 1.0;  // initial packet distance from the intersection, in valley radii

    std::size_t nx = 256;
    std::size_t ny = 256;
    double box_bohr = 20.0;

    double dt_au = 0.5;
    double horizon_fs = 150.0;
    double observer_stride_fs = 0.5;
    double snapshot_stride_fs = 10.0;

    PathSpec path;

    double density_floor = 1e-8;
    double norm_tolerance = 1e-6;
    double edge_warn = 1e-10;
    SpinorInterp interp = SpinorInterp::spectral;
    std::size_t upsample = 2;
    std::size_t lagrange_order = 8;
    bool closure = false;

    std::string output_dir = "run";

    /// Grid and step of the full-fidelity setting (1024², dt = 0.1 au).
    void apply_full_fidelity() {
        nx = ny = 1024;
        dt_au = 0.1;
    }

    ModelParams model() const {
        ModelParams p;
        p.mass = convert_units(mass_amu, Unit::amu, Unit::electron_mass);
        p.omega = convert_units(omega_cm, Unit::wavenumber, Unit::hartree);
        p.kappa = kappa_au;
        p.packet_offset = packet_offset;
        p.hbar = 1.0;
        return p;
    }

    Grid grid() const { return Grid(nx, ny, box_bohr, box_bohr); }

    /// Propagation steps between observer samples.
    std::size_t stride_steps() const {
        const double s = std::round(fs_to_au(observer_stride_fs) / dt_au);
        return s < 1.0 ? 1 : static_cast<std::size_t>(s);
    }
    double stride_au() const { return static_cast<double>(stride_steps()) * dt_au; }
    /// Number of observer intervals; the run ends on a sample.
    /// Observer intervals needed to reach the horizon (the last sample may
    /// overshoot it by less than one stride).
    std::size_t n_intervals() const {
        return static_cast<std::size_t>(std::ceil(fs_to_au(horizon_fs) / stride_au() - 1e-9));
    }
    std::size_t n_steps() const { return n_intervals() * stride_steps(); }
    /// Observer samples between snapshot files (0 disables periodic snapshots).
    std::size_t snapshot_every() const {
        if (!(snapshot_stride_fs > 0.0)) return 0;
        const double s = std::round(fs_to_au(snapshot_stride_fs) / stride_au());
        return s < 1.0 ? 1 : static_cast<std::size_t>(s);
    }

    void validate() const {
        model().validate();
        (void)grid();
        if (!(dt_au > 0.0)) throw std::invalid_argument("dt_au must be positive");
        if (!(horizon_fs >= 0.0)) throw std::invalid_argument("horizon_fs must be non-negative");
        if (!(observer_stride_fs > 0.0)) throw std::invalid_argument("observer_stride_fs must be positive");
        if (!(density_floor > 0.0 && density_floor < 1.0))
            throw std::invalid_argument("density_floor must lie in (0, 1)");
        if (path.n_points < 3) throw std::invalid_argument("path_points must be >= 3");
        if (!(path.half_angle > 0.0)) throw std::invalid_argument("path_half_angle must be positive");
        if (!(path.max_spacing_dx > path.min_spacing_dx && path.min_spacing_dx >= 0.0))
            throw std::invalid_argument("path spacing bounds must satisfy 0 <= min < max");
        if (path.substeps == 0) throw std::invalid_argument("path_substeps must be positive");
        if (!(path.max_step_dx > 0.0)) throw std::invalid_argument("path_max_step must be positive");
        if (path.max_points < path.n_points)
            throw std::invalid_argument("path_max_points must be at least path_points");
    }
};

namespace detail {

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad number for '" + key + "': " + v);
    }
    if (pos != v.size()) throw std::invalid_argument("bad number for '" + key + "': " + v);
    return d;
}

inline std::size_t parse_size(const std::string& key, const std::string& v) {
    const double d = parse_double(key, v);
    if (d < 0.0 || d != std::floor(d))
        throw std::invalid_argument("'" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("'" + key + "' must be true or false");
}

}  // namespace detail

struct ConfigKey {
    std::string key;
    std::string unit;
    std::string help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
    using namespace detail;
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        auto num = [&k](std::string key, std::string unit, std::string help, auto member) {
            k.push_back({key, unit, help,
                         [key, member](RunConfig& c, const std::string& v) {
                             member(c) = parse_double(key, v);
                         },
                         [member](const RunConfig& c) {
                             return fmt_double(member(const_cast<RunConfig&>(c)));
                         }});
        };
        auto count = [&k](std::string key, std::string help, auto member) {
            k.push_back({key, "-", help,
                         [key, member](RunConfig& c, const std::string& v) {
                             member(c) = parse_size(key, v);
                         },
                         [member](const RunConfig& c) {
                             return std::to_string(member(const_cast<RunConfig&>(c)));
                         }});
        };
        k.push_back({"mode", "-", "exact | bo",
                     [](RunConfig& c, const std::string& v) { c.mode = parse_mode(v); },
                     [](const RunConfig& c) { return std::string(mode_name(c.mode)); }});
        k.push_back({"case", "-", "initial gauge: a | b",
                     [](RunConfig& c, const std::string& v) { c.initial_case = parse_case(v); },
                     [](const RunConfig& c) { return std::string(case_name(c.initial_case)); }});
        num("mass", "amu", "nuclear mass", [](RunConfig& c) -> double& { return c.mass_amu; });
        num("omega", "cm-1", "harmonic frequency", [](RunConfig& c) -> double& { return c.omega_cm; });
        num("kappa", "hartree/bohr", "linear vibronic coupling",
            [](RunConfig& c) -> double& { return c.kappa_au; });
        num("packet_offset", "valley radii", "initial packet distance from the intersection",
            [](RunConfig& c) -> double& { return c.packet_offset; });
        count("nx", "grid nodes along x (power of two)", [](RunConfig& c) -> std::size_t& { return c.nx; });
        count("ny", "grid nodes along y (power of two)", [](RunConfig& c) -> std::size_t& { return c.ny; });
        num("box", "bohr", "box length along each axis", [](RunConfig& c) -> double& { return c.box_bohr; });
        num("dt", "au_time", "propagation time step", [](RunConfig& c) -> double& { return c.dt_au; });
        num("horizon", "fs", "simulated time", [](RunConfig& c) -> double& { return c.horizon_fs; });
        num("observer_stride", "fs", "interval between phase/path samples",
            [](RunConfig& c) -> double& { return c.observer_stride_fs; });
        num("snapshot_stride", "fs", "interval between snapshot files (0: first and last only)",
            [](RunConfig& c) -> double& { return c.snapshot_stride_fs; });
        k.push_back({"path_radius", "bohr", "initial arc radius (auto: |packet center|)",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "auto") c.path.radius_bohr.reset();
                         else c.path.radius_bohr = parse_double("path_radius", v);
                     },
                     [](const RunConfig& c) {
                         return c.path.radius_bohr ? fmt_double(*c.path.radius_bohr) : std::string("auto");
                     }});
        num("path_half_angle", "rad", "initial arc half-angle",
            [](RunConfig& c) -> double& { return c.path.half_angle; });
        count("path_points", "initial arc vertex count",
              [](RunConfig& c) -> std::size_t& { return c.path.n_points; });
        num("path_min_spacing", "dx", "lower vertex spacing bound",
            [](RunConfig& c) -> double& { return c.path.min_spacing_dx; });
        num("path_max_spacing", "dx", "upper vertex spacing bound",
            [](RunConfig& c) -> double& { return c.path.max_spacing_dx; });
        num("path_max_deviation", "dx", "largest polyline shift when dropping a vertex",
            [](RunConfig& c) -> double& { return c.path.max_deviation_dx; });
        count("path_substeps", "RK4 steps per observer interval",
              [](RunConfig& c) -> std::size_t& { return c.path.substeps; });
        count("path_invalid_after", "masked samples tolerated before the path is invalid",
              [](RunConfig& c) -> std::size_t& { return c.path.invalid_after; });
        num("path_max_step", "dx", "largest vertex displacement per RK4 step",
            [](RunConfig& c) -> double& { return c.path.max_step_dx; });
        count("path_max_points", "vertex count beyond which the path is invalid",
              [](RunConfig& c) -> std::size_t& { return c.path.max_points; });
        num("density_floor", "relative", "mask threshold relative to max density",
            [](RunConfig& c) -> double& { return c.density_floor; });
        num("norm_tolerance", "-", "abort when |norm - 1| exceeds this",
            [](RunConfig& c) -> double& { return c.norm_tolerance; });
        num("edge_warn", "relative", "warn when box-edge density exceeds this",
            [](RunConfig& c) -> double& { return c.edge_warn; });
        k.push_back({"interp", "-", "complex amplitude sampling: spectral | bilinear",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "spectral") c.interp = SpinorInterp::spectral;
                         else if (v == "bilinear") c.interp = SpinorInterp::bilinear;
                         else throw std::invalid_argument("interp must be spectral or bilinear");
                     },
                     [](const RunConfig& c) {
                         return std::string(c.interp == SpinorInterp::spectral ? "spectral" : "bilinear");
                     }});
        count("upsample", "spectral refinement factor for amplitude sampling",
              [](RunConfig& c) -> std::size_t& { return c.upsample; });
        count("lagrange_order", "points per axis of the local interpolant",
              [](RunConfig& c) -> std::size_t& { return c.lagrange_order; });
        k.push_back({"closure", "-", "also record artificially closed-path phases",
                     [](RunConfig& c, const std::string& v) { c.closure = parse_bool("closure", v); },
                     [](const RunConfig& c) { return std::string(c.closure ? "true" : "false"); }});
        k.push_back({"output_dir", "-", "directory for run output",
                     [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                     [](const RunConfig& c) { return c.output_dir; }});
        k.push_back({"preset", "-", "desk (256², dt 0.5) | full (1024², dt 0.1)",
                     [](RunConfig& c, const std::string& v) {
                         if (v == "full") c.apply_full_fidelity();
                         else if (v == "desk") {
                             c.nx = c.ny = 256;
                             c.dt_au = 0.5;
                         } else throw std::invalid_argument("preset must be desk or full");
                     },
                     [](const RunConfig&) { return std::string(); }});
        return k;
    }();
    return keys;
}

inline void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    for (const auto& k : config_keys())
        if (k.key == key) {
            k.set(c, value);
            return;
        }
    throw std::invalid_argument("unknown config key '" + key + "'");
}

namespace detail {
inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}
}  // namespace detail

/// Applies one `key=value` override.
inline void apply_override(RunConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("expected key=value, got '" + assignment + "'");
    set_config_value(c, detail::trim(assignment.substr(0, eq)), detail::trim(assignment.substr(eq + 1)));
}

/// Applies `key = value` lines on top of `base`. '#' starts a comment.
/// Lines apply in order, so a `preset` line is overridden by later keys.
inline RunConfig parse_config(std::istream& is, RunConfig base = {}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
        try {
            set_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

inline RunConfig parse_config(const std::string& text, RunConfig base = {}) {
    std::istringstream is(text);
    return parse_config(is, base);
}

/// Text form that parses back to an identical configuration.
inline std::string format_config(const RunConfig& c) {
    std::ostringstream os;
    for (const auto& k : config_keys()) {
        if (k.key == "preset") continue;
        os << k.key << " = " << k.get(c) << "  # [" << k.unit << "] " << k.help << '\n';
    }
    return os.str();
}

}  // namespace ciphase
