#pragma once

// Uniform periodic 2D grid and the field containers that live on it.
//
// Storage is row-major with x the fast index: node (i, j) sits at
// data[j * nx + i] and at coordinate (xmin + i*dx, ymin + j*dy).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ciphase {

using cplx = std::complex<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Azimuth of p about the origin in [0, 2π). The branch cut lies on the
/// positive x axis.
inline double azimuth(Point p) {
    double phi = std::atan2(p.y, p.x);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    return phi;
}

class Grid {
public:
    Grid() = default;

    Grid(std::size_t nx, std::size_t ny, double lx, double ly, double x_center = 0.0,
         double y_center = 0.0)
        : nx_(nx), ny_(ny), lx_(lx), ly_(ly), xc_(x_center), yc_(y_center) {
        auto pow2 = [](std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; };
        if (!pow2(nx) || !pow2(ny))
            throw std::invalid_argument("grid node counts must be powers of two >= 8, got " +
                                        std::to_string(nx) + "x" + std::to_string(ny));
        if (!(lx > 0.0) || !(ly > 0.0))
            throw std::invalid_argument("grid box lengths must be positive");
    }

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return nx_ * ny_; }
    double lx() const { return lx_; }
    double ly() const { return ly_; }
    double x_center() const { return xc_; }
    double y_center() const { return yc_; }
    double dx() const { return lx_ / static_cast<double>(nx_); }
    double dy() const { return ly_ / static_cast<double>(ny_); }
    double cell_area() const { return dx() * dy(); }
    double xmin() const { return xc_ - 0.5 * lx_; }
    double ymin() const { return yc_ - 0.5 * ly_; }

    double x(std::size_t i) const { return xmin() + static_cast<double>(i) * dx(); }
    double y(std::size_t j) const { return ymin() + static_cast<double>(j) * dy(); }
    Point point(std::size_t i, std::size_t j) const { return {x(i), y(j)}; }
    std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }

    // FFT ordering: 2πj/L for j < n/2, 2π(j-n)/L otherwise.
    double kx(std::size_t i) const { return wavenumber(i, nx_, lx_); }
    double ky(std::size_t j) const { return wavenumber(j, ny_, ly_); }

    bool operator==(const Grid&) const = default;

private:
    static double wavenumber(std::size_t j, std::size_t n, double l) {
        const double jj = j < n / 2 ? static_cast<double>(j)
                                    : static_cast<double>(j) - static_cast<double>(n);
        return 2.0 * std::numbers::pi * jj / l;
    }

    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    double lx_ = 0.0;
    double ly_ = 0.0;
    double xc_ = 0.0;
    double yc_ = 0.0;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
    if (!(a == b)) throw std::invalid_argument("fields live on different grids");
}

struct RealField {
    Grid grid;
    std::vector<double> data;

    RealField() = default;
    explicit RealField(const Grid& g, double fill = 0.0) : grid(g), data(g.size(), fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[grid.index(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return data[grid.index(i, j)]; }
};

struct VectorField {
    RealField x;
    RealField y;

    VectorField() = default;
    explicit VectorField(const Grid& g) : x(g), y(g) {}
    const Grid& grid() const { return x.grid; }
};

/// Per-node validity flag; 1 where the density is above the floor.
using Mask = std::vector<std::uint8_t>;

/// NC complex components per node, each stored as its own row-major plane.
template <std::size_t NC>
struct ComplexField {
    static constexpr std::size_t components = NC;

    Grid grid;
    std::array<std::vector<cplx>, NC> comp;

    ComplexField() = default;
    explicit ComplexField(const Grid& g) : grid(g) {
        for (auto& c : comp) c.assign(g.size(), cplx{0.0, 0.0});
    }

    std::array<cplx, NC> node(std::size_t idx) const {
        std::array<cplx, NC> v;
        for (std::size_t c = 0; c < NC; ++c) v[c] = comp[c][idx];
        return v;
    }
};

using ScalarField = ComplexField<1>;
using SpinorField = ComplexField<2>;

template <std::size_t NC>
double norm_squared(const ComplexField<NC>& f) {
    double s = 0.0;
    for (const auto& c : f.comp)
        for (const auto& z : c) s += std::norm(z);
    return s * f.grid.cell_area();
}

template <std::size_t NC>
void scale(ComplexField<NC>& f, double factor) {
    for (auto& c : f.comp)
        for (auto& z : c) z *= factor;
}

template <std::size_t NC>
void normalize(ComplexField<NC>& f) {
    const double n2 = norm_squared(f);
    if (!(n2 > 0.0)) throw std::invalid_argument("cannot normalize a zero field");
    scale(f, 1.0 / std::sqrt(n2));
}

// --- bilinear interpolation -------------------------------------------------

/// Four-node stencil around a point, after periodic wrapping.
struct Stencil {
    std::array<std::size_t, 4> idx;  // (i,j), (i+1,j), (i,j+1), (i+1,j+1)
    std::array<double, 4> w;
};

inline Stencil bilinear_stencil(const Grid& g, Point p) {
    auto locate = [](double u, double umin, double h, std::size_t n, std::size_t& i0,
                     std::size_t& i1, double& frac) {
        double s = (u - umin) / h;
        const double nn = static_cast<double>(n);
        s = std::fmod(s, nn);
        if (s < 0.0) s += nn;
        double fl = std::floor(s);
        frac = s - fl;
        i0 = static_cast<std::size_t>(fl) % n;
        i1 = (i0 + 1) % n;
    };
    std::size_t i0, i1, j0, j1;
    double fx, fy;
    locate(p.x, g.xmin(), g.dx(), g.nx(), i0, i1, fx);
    locate(p.y, g.ymin(), g.dy(), g.ny(), j0, j1, fy);
    return {{g.index(i0, j0), g.index(i1, j0), g.index(i0, j1), g.index(i1, j1)},
            {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
}

inline double interpolate(const RealField& f, Point p) {
    const Stencil s = bilinear_stencil(f.grid, p);
    double v = 0.0;
    for (int k = 0; k < 4; ++k) v += s.w[k] * f.data[s.idx[k]];
    return v;
}

inline bool stencil_unmasked(const Grid& g, const Mask& mask, Point p) {
    const Stencil s = bilinear_stencil(g, p);
    for (int k = 0; k < 4; ++k)
        if (!mask[s.idx[k]]) return false;
    return true;
}

template <std::size_t NC>
std::array<cplx, NC> interpolate_bilinear(const ComplexField<NC>& f, Point p) {
    const Stencil s = bilinear_stencil(f.grid, p);
    std::array<cplx, NC> v{};
    for (std::size_t c = 0; c < NC; ++c)
        for (int k = 0; k < 4; ++k) v[c] += s.w[k] * f.comp[c][s.idx[k]];
    return v;
}

}  // namespace ciphase
