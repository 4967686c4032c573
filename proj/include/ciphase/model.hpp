#pragma once

// Two-state linear E⊗e Jahn-Teller model in a diabatic basis:
//   H_el(x) = A(x) σ0 + B(x)·σ,  A = ½Mω²|x|²,  B = κ (x, y, 0).
// The conical intersection sits at the origin.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string_view>

#include "ciphase/grid.hpp"
#include "ciphase/units.hpp"

namespace ciphase {

struct ModelParams {
    double mass = convert_units(1.0, Unit::amu, Unit::electron_mass);
    double omega = convert_units(1000.0, Unit::wavenumber, Unit::hartree);
    double kappa = 0.1;
    double hbar = 1.0;
    /// Initial packet distance from the intersection in valley radii.
    double packet_offset = 2.0;

    void validate() const {
        if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
        if (!(omega > 0.0)) throw std::invalid_argument("omega must be positive");
        if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
        if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
        if (!(packet_offset > 0.0)) throw std::invalid_argument("packet offset must be positive");
    }

    /// Radius of the lower-surface valley, κ/(Mω²).
    double valley_radius() const { return kappa / (mass * omega * omega); }
    /// Depth of the valley, -κ²/(2Mω²).
    double valley_depth() const { return -kappa * kappa / (2.0 * mass * omega * omega); }
    /// Initial wavepacket center on the negative x axis, -2κ/(Mω²) by default.
    Point packet_center() const { return {-packet_offset * valley_radius(), 0.0}; }
    /// Ground-state position spread √(ħ/2Mω).
    double packet_width() const { return std::sqrt(hbar / (2.0 * mass * omega)); }
};

struct PotentialFields {
    RealField a;
    RealField bx, by, bz;
    RealField bmag;
    RealField eminus, eplus;
};

inline PotentialFields eval_potential(const ModelParams& p, const Grid& g) {
    p.validate();
    PotentialFields f{RealField(g), RealField(g), RealField(g), RealField(g),
                      RealField(g), RealField(g), RealField(g)};
    const double k2 = 0.5 * p.mass * p.omega * p.omega;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t n = g.index(i, j);
            const double x = g.x(i), y = g.y(j);
            f.a.data[n] = k2 * (x * x + y * y);
            f.bx.data[n] = p.kappa * x;
            f.by.data[n] = p.kappa * y;
            f.bmag.data[n] = std::hypot(f.bx.data[n], f.by.data[n]);
            f.eminus.data[n] = f.a.data[n] - f.bmag.data[n];
            f.eplus.data[n] = f.a.data[n] + f.bmag.data[n];
        }
    }
    return f;
}

enum class InitialCase { a, b };

inline std::string_view case_name(InitialCase c) { return c == InitialCase::a ? "a" : "b"; }

inline InitialCase parse_case(std::string_view s) {
    if (s == "a") return InitialCase::a;
    if (s == "b") return InitialCase::b;
    throw std::invalid_argument("case must be 'a' or 'b'");
}

/// Real, positive Gaussian exp(-|x - c|²/(4w²)); w is the density spread.
inline RealField gaussian_amplitude(const Grid& g, Point center, double width) {
    RealField f(g);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double dx = g.x(i) - center.x, dy = g.y(j) - center.y;
            f(i, j) = std::exp(-(dx * dx + dy * dy) / (4.0 * width * width));
        }
    return f;
}

/// Adiabatic ground state of B·σ with B ∥ (cos φ, sin φ, 0) in the gauge
/// of the given case. φ ∈ [0, 2π); gauge (a) jumps sign across the
/// positive x axis.
inline std::array<cplx, 2> ground_frame(InitialCase c, double phi) {
    const double r = 1.0 / std::numbers::sqrt2;
    if (c == InitialCase::a)
        return {r * std::polar(1.0, -0.5 * phi), -r * std::polar(1.0, 0.5 * phi)};
    return {cplx{-r, 0.0}, r * std::polar(1.0, phi)};
}

/// Frame azimuth at a node; the origin takes the limit along φ = π.
inline double frame_azimuth(Point p) {
    if (p.x == 0.0 && p.y == 0.0) return std::numbers::pi;
    return azimuth(p);
}

/// Ψ0(x) = ψ0(x)|u−(x)⟩ with ψ0 the real ground-width Gaussian at the
/// packet center, normalized to one on the grid.
inline SpinorField initial_state(InitialCase c, const ModelParams& p, const Grid& g) {
    p.validate();
    const RealField psi0 = gaussian_amplitude(g, p.packet_center(), p.packet_width());
    SpinorField f(g);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t n = g.index(i, j);
            const auto u = ground_frame(c, frame_azimuth(g.point(i, j)));
            f.comp[0][n] = psi0.data[n] * u[0];
            f.comp[1][n] = psi0.data[n] * u[1];
        }
    normalize(f);
    return f;
}

/// Born-Oppenheimer counterpart: ψ0 for case (a), e^{iφ/2}ψ0 for case (b).
inline ScalarField initial_state_bo(InitialCase c, const ModelParams& p, const Grid& g) {
    p.validate();
    const RealField psi0 = gaussian_amplitude(g, p.packet_center(), p.packet_width());
    ScalarField f(g);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t n = g.index(i, j);
            f.comp[0][n] = c == InitialCase::a
                               ? cplx{psi0.data[n], 0.0}
                               : psi0.data[n] * std::polar(1.0, 0.5 * frame_azimuth(g.point(i, j)));
        }
    normalize(f);
    return f;
}

}  // namespace ciphase
