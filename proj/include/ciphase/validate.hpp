#pragma once

// Built-in numerical checks against closed-form results.

#include <random>
#include <string>

#include "ciphase/analysis.hpp"
#include "ciphase/config.hpp"
#include "ciphase/experiment.hpp"
#include "ciphase/propagator.hpp"

namespace ciphase {

struct ValidationCheck {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = false;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
    }
    void add(std::string name, double value, double limit) {
        checks.push_back({std::move(name), value, limit, value <= limit});
    }
};

/// Discrete Pancharatnam phase of a Bloch-sphere great circle through both
/// poles (meridian down, antimeridian up) with `n` states; the result is π.
inline PancharatnamResult bloch_meridian_loop(std::size_t n) {
    std::vector<std::array<cplx, 2>> states;
    for (std::size_t k = 0; k <= n; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        states.push_back({cplx{std::cos(0.5 * theta), 0.0}, cplx{std::sin(0.5 * theta), 0.0}});
    }
    return pancharatnam_phase<2>(states);
}

/// Ground-state spinors of B·σ sampled counter-clockwise on a full circle
/// around the intersection in the given gauge; the loop phase is π.
inline PancharatnamResult ground_state_loop(InitialCase gauge, std::size_t n) {
    std::vector<std::array<cplx, 2>> states;
    for (std::size_t k = 0; k <= n; ++k)
        states.push_back(ground_frame(
            gauge, std::fmod(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.1,
                             2.0 * std::numbers::pi)));
    return pancharatnam_phase<2>(states);
}

inline ValidationReport validate_bloch() {
    ValidationReport r;
    for (std::size_t n : {64, 256, 1024}) {
        r.add("meridian loop, " + std::to_string(n) + " states: |phase - pi|",
              phase_distance(bloch_meridian_loop(n).phase, std::numbers::pi), 1e-6);
    }
    for (auto c : {InitialCase::a, InitialCase::b})
        r.add("ground-state loop around the intersection, gauge " + std::string(case_name(c)) +
                  ": |phase - pi|",
              phase_distance(ground_state_loop(c, 128).phase, std::numbers::pi), 1e-6);
    return r;
}

inline ValidationReport validate_vortex() {
    ValidationReport r;
    const RunConfig cfg;
    const ModelParams m = cfg.model();
    const Grid g = cfg.grid();
    const SpinorField psi = initial_state(InitialCase::b, m, g);
    const MomentumField mf = momentum_field(psi, m.hbar, cfg.density_floor);
    const AdvectedPath arc = make_path(cfg.path, m);
    const LineIntegral gn = gamma_n(mf.pi, mf.mask, arc.path, m.hbar);
    r.add("case (b) initial arc: |gamma_n + half_angle|", std::abs(gn.value + cfg.path.half_angle), 1e-5);

    double worst = 0.0;
    const Point c = m.packet_center();
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const Point p = g.point(i, j);
            if (distance(p, c) > 3.0 * m.packet_width()) continue;
            const double r2 = dot(p, p);
            const Point expect{-m.hbar * p.y / (2.0 * r2), m.hbar * p.x / (2.0 * r2)};
            const std::size_t n = g.index(i, j);
            const Point got{mf.pi.x.data[n], mf.pi.y.data[n]};
            worst = std::max(worst, norm(got - expect) / norm(expect));
        }
    r.add("case (b) initial field vs hbar/(2r) e_phi: max relative error", worst, 1e-6);

    const WindingStudy w = winding_study(256, cfg.box_bohr, m.valley_radius(), m.packet_width(), 0.25, m.hbar);
    r.add("annular vortex winding residual (n = " + std::to_string(w.result.n) + ")", w.result.residual, 1e-3);
    return r;
}

/// Variance of the density along x about its mean.
template <std::size_t NC>
std::pair<double, double> mean_and_variance_x(const ComplexField<NC>& psi) {
    const RealField n = density(psi);
    const Grid& g = psi.grid;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double w = n(i, j), x = g.x(i);
            s0 += w;
            s1 += w * x;
            s2 += w * x * x;
        }
    const double mean = s1 / s0;
    return {mean, s2 / s0 - mean * mean};
}

inline ValidationReport validate_propagation() {
    ValidationReport r;
    const ModelParams m = RunConfig{}.model();
    const Grid g(128, 128, 20.0, 20.0);
    const double sigma0 = m.packet_width();

    // Free spreading: σ(t)² = σ0²(1 + (ħt/(2Mσ0²))²).
    {
        ScalarField psi(g);
        const RealField amp = gaussian_amplitude(g, {0.0, 0.0}, sigma0);
        for (std::size_t k = 0; k < g.size(); ++k) psi.comp[0][k] = amp.data[k];
        normalize(psi);
        const double dt = 0.5;
        const std::size_t steps = 400;
        const Propagator<1> prop(RealField(g), m.mass, dt, m.hbar);
        propagate<1>(psi, prop, steps);
        const double t = dt * static_cast<double>(steps);
        const double q = m.hbar * t / (2.0 * m.mass * sigma0 * sigma0);
        const double expect = sigma0 * sigma0 * (1.0 + q * q);
        r.add("free Gaussian variance after 200 au: relative error",
              std::abs(mean_and_variance_x(psi).second - expect) / expect, 1e-10);
        r.add("free Gaussian norm drift", std::abs(norm_squared(psi) - 1.0), 1e-12);
    }

    // Displaced coherent state in the uncoupled harmonic well returns after one period.
    {
        ModelParams h = m;
        h.kappa = 0.0;
        const Grid g(256, 256, 20.0, 20.0);
        const PotentialFields pot = eval_potential(h, g);
        const Point x0{-1.5, 0.0};  // peak momentum well inside the grid band
        ScalarField psi(g);
        const RealField amp = gaussian_amplitude(g, x0, sigma0);
        for (std::size_t k = 0; k < g.size(); ++k) psi.comp[0][k] = amp.data[k];
        normalize(psi);
        const double period = 2.0 * std::numbers::pi / h.omega;
        const auto steps = static_cast<std::size_t>(std::llround(period / 0.5));
        const double dt = period / static_cast<double>(steps);
        const Propagator<1> prop(pot.eminus, h.mass, dt, h.hbar);
        const double e0 = prop.energy(psi);
        propagate<1>(psi, prop, steps / 2);
        const double half = mean_and_variance_x(psi).first;
        propagate<1>(psi, prop, steps - steps / 2);
        const auto [mean, var] = mean_and_variance_x(psi);
        r.add("harmonic half period: |<x> + x0|", std::abs(half + x0.x), 1e-4);
        r.add("harmonic full period: |<x> - x0|", std::abs(mean - x0.x), 1e-4);
        r.add("harmonic full period: width relative error",
              std::abs(var - sigma0 * sigma0) / (sigma0 * sigma0), 1e-4);
        r.add("harmonic energy drift", std::abs(prop.energy(psi) - e0), 1e-6);
    }
    return r;
}

/// Randomized re-gauging of factored pairs Ψ = ψ u: u → e^{iθ}u, ψ → e^{−iθ}ψ
/// leaves every phase unchanged, and the Pancharatnam product of u alone is
/// invariant under u → e^{iθ}u.
inline ValidationReport validate_gauge(std::uint64_t seed = 20240601) {
    ValidationReport r;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::normal_distribution<double> gauss;
    double worst_p = 0.0, worst_theta = 0.0;
    for (int trial = 0; trial < 16; ++trial) {
        const std::size_t n = 65;
        std::vector<std::array<cplx, 2>> u(n), ug(n);
        std::vector<cplx> psi(n);
        // A slowly varying spinor direction and nuclear amplitude along a path.
        const double a0 = ang(rng), a1 = ang(rng), b0 = ang(rng), b1 = ang(rng);
        for (std::size_t k = 0; k < n; ++k) {
            const double s = static_cast<double>(k) / static_cast<double>(n - 1);
            const double th = a0 + a1 * s, ph = b0 + b1 * s;
            u[k] = {cplx{std::cos(0.5 * th), 0.0}, std::polar(std::sin(0.5 * th), ph)};
            psi[k] = std::polar(1.0 + 0.1 * gauss(rng), ang(rng));
            const cplx g = std::polar(1.0, ang(rng));
            ug[k] = {u[k][0] * g, u[k][1] * g};
        }
        const auto p0 = pancharatnam_phase<2>(u);
        const auto p1 = pancharatnam_phase<2>(ug);
        worst_p = std::max(worst_p, phase_distance(p0.phase, p1.phase));

        // Total-state overlap between endpoints is unchanged by compensating factors.
        auto total = [&](const std::array<cplx, 2>& uu, cplx ps) {
            return std::array<cplx, 2>{uu[0] * ps, uu[1] * ps};
        };
        const cplx ga = std::polar(1.0, ang(rng)), gb = std::polar(1.0, ang(rng));
        const auto ta = total(u[0], psi[0]), tb = total(u[n - 1], psi[n - 1]);
        const auto ta2 = total({u[0][0] * ga, u[0][1] * ga}, psi[0] / ga);
        const auto tb2 = total({u[n - 1][0] * gb, u[n - 1][1] * gb}, psi[n - 1] / gb);
        const cplx o1 = std::conj(ta[0]) * tb[0] + std::conj(ta[1]) * tb[1];
        const cplx o2 = std::conj(ta2[0]) * tb2[0] + std::conj(ta2[1]) * tb2[1];
        worst_theta = std::max(worst_theta, phase_distance(std::arg(o1), std::arg(o2)));
    }
    r.add("Pancharatnam product under random re-gauging", worst_p, 1e-10);
    r.add("total overlap phase under compensating re-gauging", worst_theta, 1e-10);

    // Field-level: the two initial gauges describe the same density and
    // polarization; the phase record of a grid state is unchanged by a global phase.
    const RunConfig cfg;
    const ModelParams m = cfg.model();
    const Grid g(128, 128, cfg.box_bohr, cfg.box_bohr);
    SpinorField psi = initial_state(InitialCase::a, m, g);
    const Fft2d fft(g);
    const ObservableSet o1 = compute_observables(psi, fft, m.mass, m.hbar, cfg.density_floor);
    const AdvectedPath arc = make_path(cfg.path, m);
    const PathSampler<2> s1(psi, fft, SpinorInterp::spectral, 2, 8, m.hbar);
    const PhaseRecord r1 = compute_phase_record(s1, o1, arc.path, cfg.density_floor);
    const cplx gl = std::polar(1.0, ang(rng));
    for (auto& c : psi.comp)
        for (auto& z : c) z *= gl;
    const ObservableSet o2 = compute_observables(psi, fft, m.mass, m.hbar, cfg.density_floor);
    const PathSampler<2> s2(psi, fft, SpinorInterp::spectral, 2, 8, m.hbar);
    const PhaseRecord r2 = compute_phase_record(s2, o2, arc.path, cfg.density_floor);
    r.add("global phase: |delta gamma_n| + |delta gamma_el| + |delta theta|",
          std::abs(r1.gamma_n - r2.gamma_n) + phase_distance(r1.gamma_el, r2.gamma_el) +
              phase_distance(r1.theta_ab, r2.theta_ab) +
              phase_distance(r1.gamma_el_pancharatnam, r2.gamma_el_pancharatnam),
          1e-10);
    return r;
}

inline ValidationReport validate_suite(const std::string& name) {
    if (name == "bloch") return validate_bloch();
    if (name == "vortex") return validate_vortex();
    if (name == "propagation") return validate_propagation();
    if (name == "gauge") return validate_gauge();
    throw std::invalid_argument("unknown validation suite '" + name + "'");
}

}  // namespace ciphase
