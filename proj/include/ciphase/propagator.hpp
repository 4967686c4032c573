#pragma once

// Second-order Strang split-operator stepping, V/2 · T · V/2, for the
// two-state spinor (exact) and single-surface scalar (Born-Oppenheimer)
// Schrödinger equations on a periodic grid.

#include <cmath>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ciphase/fft.hpp"
#include "ciphase/model.hpp"

namespace ciphase {

/// exp(-i (a σ0 + b·σ) τ) as {U11, U12, U21, U22}.
inline std::array<cplx, 4> pauli_exponential(double a, double bx, double by, double bz,
                                             double tau) {
    const double bmag = std::sqrt(bx * bx + by * by + bz * bz);
    const cplx e = std::polar(1.0, -a * tau);
    if (bmag == 0.0) return {e, cplx{0.0, 0.0}, cplx{0.0, 0.0}, e};
    const double c = std::cos(bmag * tau);
    const double s = std::sin(bmag * tau) / bmag;
    const cplx I{0.0, 1.0};
    return {e * (c - I * s * bz), e * (-I * s * cplx{bx, -by}), e * (-I * s * cplx{bx, by}),
            e * (c + I * s * bz)};
}

struct SpinorHalfStep {
    std::vector<cplx> u11, u12, u21, u22;
};

/// Per-node unitaries exp(-i H_el(x) dt / (2ħ)).
inline SpinorHalfStep potential_half_step(const PotentialFields& v, double dt, double hbar = 1.0) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    const std::size_t n = v.a.data.size();
    SpinorHalfStep h{std::vector<cplx>(n), std::vector<cplx>(n), std::vector<cplx>(n),
                     std::vector<cplx>(n)};
    const double tau = dt / (2.0 * hbar);
    for (std::size_t k = 0; k < n; ++k) {
        const auto u = pauli_exponential(v.a.data[k], v.bx.data[k], v.by.data[k], v.bz.data[k], tau);
        h.u11[k] = u[0];
        h.u12[k] = u[1];
        h.u21[k] = u[2];
        h.u22[k] = u[3];
    }
    return h;
}

class NormDriftError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <std::size_t NC>
class Propagator {
    static_assert(NC == 1 || NC == 2);

public:
    /// Exact two-state propagation under the full diabatic Hamiltonian.
    Propagator(const PotentialFields& v, double mass, double dt, double hbar = 1.0)
        requires(NC == 2)
        : grid_(v.a.grid), fft_(grid_), mass_(mass), dt_(dt), hbar_(hbar), pot_(v),
          half_(potential_half_step(v, dt, hbar)) {
        init_kinetic();
    }

    /// Single-surface propagation on the scalar potential `v`.
    Propagator(const RealField& v, double mass, double dt, double hbar = 1.0)
        requires(NC == 1)
        : grid_(v.grid), fft_(grid_), mass_(mass), dt_(dt), hbar_(hbar), scalar_pot_(v) {
        if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
        const double tau = dt / (2.0 * hbar);
        scalar_half_.resize(v.data.size());
        for (std::size_t k = 0; k < v.data.size(); ++k)
            scalar_half_[k] = std::polar(1.0, -v.data[k] * tau);
        init_kinetic();
    }

    const Grid& grid() const { return grid_; }
    const Fft2d& fft() const { return fft_; }
    double dt() const { return dt_; }
    double mass() const { return mass_; }
    double hbar() const { return hbar_; }
    /// exp(-iħk²dt/2M) per node, FFT ordering.
    const std::vector<cplx>& kinetic_factor() const { return kinetic_; }
    const SpinorHalfStep& spinor_half_step() const requires(NC == 2) { return half_; }

    void step(ComplexField<NC>& psi) const {
        require_same_grid(psi.grid, grid_);
        apply_potential(psi);
        for (auto& c : psi.comp) {
            fft_.forward(c);
            for (std::size_t k = 0; k < c.size(); ++k) c[k] *= kinetic_[k];
            fft_.backward(c);
        }
        apply_potential(psi);
    }

    /// ⟨Ψ|T + V|Ψ⟩ in hartree.
    double energy(const ComplexField<NC>& psi) const {
        require_same_grid(psi.grid, grid_);
        const double dA = grid_.cell_area();
        double kin = 0.0;
        std::vector<cplx> buf;
        for (const auto& c : psi.comp) {
            buf = c;
            fft_.forward(buf);
            for (std::size_t k = 0; k < buf.size(); ++k) kin += std::norm(buf[k]) * k2_[k];
        }
        kin *= hbar_ * hbar_ / (2.0 * mass_) * dA / static_cast<double>(grid_.size());
        double pot = 0.0;
        if constexpr (NC == 1) {
            for (std::size_t k = 0; k < grid_.size(); ++k)
                pot += std::norm(psi.comp[0][k]) * scalar_pot_.data[k];
        } else {
            for (std::size_t k = 0; k < grid_.size(); ++k) {
                const cplx p1 = psi.comp[0][k], p2 = psi.comp[1][k];
                const double n1 = std::norm(p1), n2 = std::norm(p2);
                const cplx c12 = std::conj(p1) * p2;
                pot += (n1 + n2) * pot_.a.data[k] + (n1 - n2) * pot_.bz.data[k] +
                       2.0 * (c12.real() * pot_.bx.data[k] + c12.imag() * pot_.by.data[k]);
            }
        }
        return kin + pot * dA;
    }

private:
    void init_kinetic() {
        kinetic_.resize(grid_.size());
        k2_.resize(grid_.size());
        for (std::size_t j = 0; j < grid_.ny(); ++j)
            for (std::size_t i = 0; i < grid_.nx(); ++i) {
                const std::size_t k = grid_.index(i, j);
                k2_[k] = grid_.kx(i) * grid_.kx(i) + grid_.ky(j) * grid_.ky(j);
                kinetic_[k] = std::polar(1.0, -hbar_ * k2_[k] * dt_ / (2.0 * mass_));
            }
    }

    void apply_potential(ComplexField<NC>& psi) const {
        if constexpr (NC == 1) {
            auto& c = psi.comp[0];
            for (std::size_t k = 0; k < c.size(); ++k) c[k] *= scalar_half_[k];
        } else {
            auto& c1 = psi.comp[0];
            auto& c2 = psi.comp[1];
            for (std::size_t k = 0; k < c1.size(); ++k) {
                const cplx a = c1[k], b = c2[k];
                c1[k] = half_.u11[k] * a + half_.u12[k] * b;
                c2[k] = half_.u21[k] * a + half_.u22[k] * b;
            }
        }
    }

    Grid grid_;
    Fft2d fft_;
    double mass_;
    double dt_;
    double hbar_;
    std::vector<cplx> kinetic_;
    std::vector<double> k2_;
    PotentialFields pot_;
    SpinorHalfStep half_;
    RealField scalar_pot_;
    std::vector<cplx> scalar_half_;
};

/// Callback invoked after every `stride`-th step (absolute step count).
template <std::size_t NC>
struct Observer {
    std::size_t stride = 1;
    std::function<void(const ComplexField<NC>&, std::size_t step)> on_sample;
};

/// Applies `n_steps` steps starting from absolute step `first_step`.
/// Observers fire whenever the absolute step count is a positive multiple of
/// their stride; the norm is checked at each such point and at the end.
/// Returns the absolute step count reached.
template <std::size_t NC>
std::size_t propagate(ComplexField<NC>& psi, const Propagator<NC>& prop, std::size_t n_steps,
                      std::span<const Observer<NC>> observers = {}, std::size_t first_step = 0,
                      double norm_tolerance = 1e-6) {
    for (const auto& o : observers)
        if (o.stride == 0) throw std::invalid_argument("observer stride must be positive");
    auto check_norm = [&](std::size_t step) {
        const double drift = std::abs(norm_squared(psi) - 1.0);
        if (!(drift <= norm_tolerance)) {
            std::ostringstream os;
            os << "norm drift " << drift << " exceeds " << norm_tolerance << " at step " << step;
            throw NormDriftError(os.str());
        }
    };
    std::size_t step = first_step;
    for (std::size_t s = 0; s < n_steps; ++s) {
        prop.step(psi);
        ++step;
        bool checked = false;
        for (const auto& o : observers) {
            if (step % o.stride != 0) continue;
            if (!checked) {
                check_norm(step);
                checked = true;
            }
            if (o.on_sample) o.on_sample(psi, step);
        }
    }
    if (n_steps > 0) check_norm(step);
    return step;
}

}  // namespace ciphase
