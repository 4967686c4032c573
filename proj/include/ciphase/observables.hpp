#pragma once

// Gauge-invariant fields of the total wavefunction: nuclear density n,
// mechanical momentum π = Re⟨Ψ|p̂|Ψ⟩_el / n, velocity v = π/M and the
// polarization s of the conditional electronic state.

#include <algorithm>
#include <array>

#include "ciphase/fft.hpp"

namespace ciphase {

inline constexpr double default_density_floor = 1e-8;

template <std::size_t NC>
RealField density(const ComplexField<NC>& psi) {
    RealField n(psi.grid);
    for (const auto& c : psi.comp)
        for (std::size_t k = 0; k < c.size(); ++k) n.data[k] += std::norm(c[k]);
    return n;
}

inline double max_value(const RealField& f) {
    return f.data.empty() ? 0.0 : *std::max_element(f.data.begin(), f.data.end());
}

/// 1 where n >= floor * max(n).
inline Mask density_mask(const RealField& n, double relative_floor) {
    const double cut = relative_floor * max_value(n);
    Mask m(n.data.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = n.data[k] >= cut ? 1 : 0;
    return m;
}

struct MomentumField {
    VectorField pi;
    Mask mask;
};

/// π_k = ħ Im Σ_c Ψc* ∂_k Ψc / n with spectral derivatives; zero on masked nodes.
template <std::size_t NC>
MomentumField momentum_field(const ComplexField<NC>& psi, const Fft2d& fft, double hbar = 1.0,
                             double relative_floor = default_density_floor) {
    require_same_grid(psi.grid, fft.grid());
    const Grid& g = psi.grid;
    const RealField n = density(psi);
    MomentumField out{VectorField(g), density_mask(n, relative_floor)};
    std::vector<double> jx(g.size(), 0.0), jy(g.size(), 0.0);
    std::vector<cplx> spec, gx, gy;
    for (const auto& c : psi.comp) {
        spec = c;
        fft.forward(spec);
        gradient_from_spectrum(fft, spec, gx, gy);
        for (std::size_t k = 0; k < g.size(); ++k) {
            jx[k] += (std::conj(c[k]) * gx[k]).imag();
            jy[k] += (std::conj(c[k]) * gy[k]).imag();
        }
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!out.mask[k]) continue;
        out.pi.x.data[k] = hbar * jx[k] / n.data[k];
        out.pi.y.data[k] = hbar * jy[k] / n.data[k];
    }
    return out;
}

template <std::size_t NC>
MomentumField momentum_field(const ComplexField<NC>& psi, double hbar = 1.0,
                             double relative_floor = default_density_floor) {
    Fft2d fft(psi.grid);
    return momentum_field(psi, fft, hbar, relative_floor);
}

struct PolarizationField {
    std::array<RealField, 3> s;
    Mask mask;
};

/// s_i = Ψ†σ_iΨ / n. A scalar (Born-Oppenheimer) state carries the fixed
/// electronic vector [0, 1], so s = (0, 0, -1) there.
template <std::size_t NC>
PolarizationField polarization(const ComplexField<NC>& psi,
                               double relative_floor = default_density_floor) {
    const Grid& g = psi.grid;
    const RealField n = density(psi);
    PolarizationField out{{RealField(g), RealField(g), RealField(g)},
                          density_mask(n, relative_floor)};
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!out.mask[k]) continue;
        if constexpr (NC == 1) {
            out.s[2].data[k] = -1.0;
        } else {
            const cplx c12 = std::conj(psi.comp[0][k]) * psi.comp[1][k];
            out.s[0].data[k] = 2.0 * c12.real() / n.data[k];
            out.s[1].data[k] = 2.0 * c12.imag() / n.data[k];
            out.s[2].data[k] =
                (std::norm(psi.comp[0][k]) - std::norm(psi.comp[1][k])) / n.data[k];
        }
    }
    return out;
}

struct ObservableSet {
    RealField n;
    VectorField pi;
    VectorField v;
    std::array<RealField, 3> s;
    Mask mask;
    double n_max = 0.0;

    const Grid& grid() const { return n.grid; }
};

template <std::size_t NC>
ObservableSet compute_observables(const ComplexField<NC>& psi, const Fft2d& fft, double mass,
                                  double hbar = 1.0,
                                  double relative_floor = default_density_floor) {
    MomentumField mf = momentum_field(psi, fft, hbar, relative_floor);
    PolarizationField pf = polarization(psi, relative_floor);
    ObservableSet o{density(psi), std::move(mf.pi), VectorField(psi.grid), std::move(pf.s),
                    std::move(mf.mask), 0.0};
    o.n_max = max_value(o.n);
    for (std::size_t k = 0; k < o.n.data.size(); ++k) {
        o.v.x.data[k] = o.pi.x.data[k] / mass;
        o.v.y.data[k] = o.pi.y.data[k] / mass;
    }
    return o;
}

/// Density-weighted mean of |s + x/|x|| over unmasked nodes; zero for an
/// exactly adiabatic ground-state distribution.
inline double nonadiabaticity(const ObservableSet& o) {
    const Grid& g = o.grid();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            const Point p = g.point(i, j);
            const double r = norm(p);
            if (!o.mask[k] || r == 0.0) continue;
            const double dx = o.s[0].data[k] + p.x / r;
            const double dy = o.s[1].data[k] + p.y / r;
            const double dz = o.s[2].data[k];
            num += o.n.data[k] * std::sqrt(dx * dx + dy * dy + dz * dz);
            den += o.n.data[k];
        }
    return den > 0.0 ? num / den : 0.0;
}

/// Largest density on the outermost ring of nodes relative to max(n).
inline double edge_density_ratio(const RealField& n) {
    const Grid& g = n.grid;
    double edge = 0.0;
    for (std::size_t i = 0; i < g.nx(); ++i)
        edge = std::max({edge, n(i, 0), n(i, g.ny() - 1)});
    for (std::size_t j = 0; j < g.ny(); ++j)
        edge = std::max({edge, n(0, j), n(g.nx() - 1, j)});
    const double m = max_value(n);
    return m > 0.0 ? edge / m : 0.0;
}

}  // namespace ciphase
