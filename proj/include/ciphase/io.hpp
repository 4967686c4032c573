#pragma once

// On-disk formats. See docs/FORMATS.md for the byte-level layouts.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ciphase/observables.hpp"
#include "ciphase/phases.hpp"

namespace ciphase::io {

namespace fs = std::filesystem;

inline constexpr char snapshot_magic[8] = {'C', 'I', 'P', 'H', 'S', 'N', 'A', 'P'};
inline constexpr char observable_magic[8] = {'C', 'I', 'P', 'H', 'O', 'B', 'S', 'V'};
inline constexpr std::uint32_t format_version = 1;

class IoError : public std::runtime_error {
public:
    IoError(const fs::path& file, const std::string& what)
        : std::runtime_error(file.string() + ": " + what) {}
};

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    unsigned char b[sizeof(T)];
    is.read(reinterpret_cast<char*>(b), sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

inline std::ofstream open_out(const fs::path& file, bool binary) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream os(file, binary ? std::ios::binary : std::ios::out);
    if (!os) throw IoError(file, "cannot open for writing");
    return os;
}

inline std::ifstream open_in(const fs::path& file, bool binary) {
    std::ifstream is(file, binary ? std::ios::binary : std::ios::in);
    if (!is) throw IoError(file, "cannot open for reading");
    return is;
}

inline void write_header(std::ostream& os, const char (&magic)[8], std::size_t nx, std::size_t ny,
                         std::size_t ncomp, double t) {
    os.write(magic, 8);
    put_le<std::uint32_t>(os, format_version);
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(nx));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ny));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ncomp));
    put_le<double>(os, t);
}

}  // namespace detail

/// Generic content of a snapshot file.
struct Snapshot {
    std::size_t nx = 0, ny = 0;
    double t_au = 0.0;
    std::vector<std::vector<cplx>> comp;
};

template <std::size_t NC>
void write_snapshot(const fs::path& file, const ComplexField<NC>& f, double t_au) {
    auto os = detail::open_out(file, true);
    detail::write_header(os, snapshot_magic, f.grid.nx(), f.grid.ny(), NC, t_au);
    for (const auto& c : f.comp)
        for (const auto& z : c) {
            detail::put_le<double>(os, z.real());
            detail::put_le<double>(os, z.imag());
        }
    if (!os) throw IoError(file, "write failed");
}

inline Snapshot read_snapshot(const fs::path& file) {
    auto is = detail::open_in(file, true);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, snapshot_magic, 8) != 0) throw IoError(file, "not a snapshot file");
    const auto version = detail::get_le<std::uint32_t>(is);
    if (version != format_version)
        throw IoError(file, "unsupported snapshot version " + std::to_string(version));
    Snapshot s;
    s.nx = detail::get_le<std::uint32_t>(is);
    s.ny = detail::get_le<std::uint32_t>(is);
    const auto nc = detail::get_le<std::uint32_t>(is);
    s.t_au = detail::get_le<double>(is);
    s.comp.assign(nc, std::vector<cplx>(s.nx * s.ny));
    for (auto& c : s.comp)
        for (auto& z : c) {
            const double re = detail::get_le<double>(is);
            const double im = detail::get_le<double>(is);
            z = {re, im};
        }
    if (!is) throw IoError(file, "truncated snapshot payload");
    return s;
}

template <std::size_t NC>
ComplexField<NC> to_field(const Snapshot& s, const Grid& g) {
    if (s.nx != g.nx() || s.ny != g.ny() || s.comp.size() != NC)
        throw std::invalid_argument("snapshot shape does not match the requested field");
    ComplexField<NC> f(g);
    for (std::size_t c = 0; c < NC; ++c) f.comp[c] = s.comp[c];
    return f;
}

/// Real observable planes in this order: n, pi_x, pi_y, s_x, s_y, s_z, mask.
inline void write_observables(const fs::path& file, const ObservableSet& o, double t_au) {
    auto os = detail::open_out(file, true);
    const Grid& g = o.grid();
    detail::write_header(os, observable_magic, g.nx(), g.ny(), 7, t_au);
    for (const RealField* f : {&o.n, &o.pi.x, &o.pi.y, &o.s[0], &o.s[1], &o.s[2]})
        for (double v : f->data) detail::put_le<double>(os, v);
    for (auto m : o.mask) detail::put_le<double>(os, m ? 1.0 : 0.0);
    if (!os) throw IoError(file, "write failed");
}

struct ObservableFile {
    std::size_t nx = 0, ny = 0;
    double t_au = 0.0;
    std::vector<std::vector<double>> planes;
};

inline ObservableFile read_observables(const fs::path& file) {
    auto is = detail::open_in(file, true);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, observable_magic, 8) != 0)
        throw IoError(file, "not an observable file");
    if (detail::get_le<std::uint32_t>(is) != format_version)
        throw IoError(file, "unsupported observable file version");
    ObservableFile o;
    o.nx = detail::get_le<std::uint32_t>(is);
    o.ny = detail::get_le<std::uint32_t>(is);
    const auto nc = detail::get_le<std::uint32_t>(is);
    o.t_au = detail::get_le<double>(is);
    o.planes.assign(nc, std::vector<double>(o.nx * o.ny));
    for (auto& p : o.planes)
        for (auto& v : p) v = detail::get_le<double>(is);
    if (!is) throw IoError(file, "truncated observable payload");
    return o;
}

// --- phase table ------------------------------------------------------------

inline const char* phase_table_header =
    "t_fs\tgamma_n\tgamma_el\tgamma_el_pancharatnam\ttheta_ab\tn_a\tn_b\tvalid\ttheta_valid"
    "\tgamma_n_valid\tpancharatnam_valid\tpath_valid\tmin_overlap";

inline void write_phase_table(const fs::path& file, const std::vector<PhaseRecord>& rows) {
    auto os = detail::open_out(file, false);
    os << phase_table_header << '\n' << std::setprecision(17);
    for (const auto& r : rows) {
        os << r.t_fs << '\t' << r.gamma_n << '\t' << r.gamma_el << '\t' << r.gamma_el_pancharatnam
           << '\t' << r.theta_ab << '\t' << r.n_a << '\t' << r.n_b << '\t' << int(r.valid())
           << '\t' << int(r.theta_valid) << '\t' << int(r.gamma_n_valid) << '\t'
           << int(r.pancharatnam_valid) << '\t' << int(r.path_valid) << '\t' << r.min_overlap
           << '\n';
    }
    if (!os) throw IoError(file, "write failed");
}

inline std::vector<PhaseRecord> read_phase_table(const fs::path& file) {
    auto is = detail::open_in(file, false);
    std::string line;
    std::getline(is, line);
    if (line != phase_table_header) throw IoError(file, "unexpected phase table header");
    std::vector<PhaseRecord> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        PhaseRecord r;
        int valid, tv, gv, pv, av;
        ls >> r.t_fs >> r.gamma_n >> r.gamma_el >> r.gamma_el_pancharatnam >> r.theta_ab >> r.n_a >>
            r.n_b >> valid >> tv >> gv >> pv >> av >> r.min_overlap;
        if (!ls) throw IoError(file, "malformed row: " + line);
        r.theta_valid = tv;
        r.gamma_n_valid = gv;
        r.pancharatnam_valid = pv;
        r.path_valid = av;
        rows.push_back(r);
    }
    return rows;
}

// --- path file --------------------------------------------------------------

/// One line per sample: t_fs valid count x0 y0 x1 y1 ...
struct PathSample {
    double t_fs = 0.0;
    bool valid = true;
    PolylinePath path;
};

inline void write_path_line(std::ostream& os, double t_fs, bool valid, const PolylinePath& p) {
    os << std::setprecision(17) << t_fs << ' ' << int(valid) << ' ' << p.points.size();
    for (Point q : p.points) os << ' ' << q.x << ' ' << q.y;
    os << '\n';
}

inline std::vector<PathSample> read_path_file(const fs::path& file) {
    auto is = detail::open_in(file, false);
    std::vector<PathSample> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        PathSample s;
        int valid;
        std::size_t n;
        ls >> s.t_fs >> valid >> n;
        s.valid = valid;
        s.path.points.resize(n);
        for (auto& q : s.path.points) ls >> q.x >> q.y;
        if (!ls) throw IoError(file, "malformed path line");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace ciphase::io
