#pragma once

// FFTW-backed transforms on a Grid, spectral derivatives, and band-limited
// sampling of complex fields at off-grid points.
//
// Normalization: the forward transform is unnormalized and the inverse
// carries the full 1/(nx*ny), so backward(forward(f)) == f and
//   sum |f|^2 == (1/(nx*ny)) * sum |F|^2.

#include <fftw3.h>

#include <mutex>
#include <span>
#include <utility>

#include "ciphase/grid.hpp"

namespace ciphase {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// In-place 2D complex transforms for one grid shape. Plans use
/// FFTW_ESTIMATE so that results are bit-reproducible across processes.
class Fft2d {
public:
    explicit Fft2d(const Grid& g) : grid_(g) {
        std::vector<cplx> scratch(g.size());
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        const int n0 = static_cast<int>(g.ny());
        const int n1 = static_cast<int>(g.nx());
        std::lock_guard lock(detail::fftw_planner_mutex());
        fwd_ = fftw_plan_dft_2d(n0, n1, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        bwd_ = fftw_plan_dft_2d(n0, n1, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !bwd_) throw std::runtime_error("FFTW plan creation failed");
    }

    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;
    Fft2d(Fft2d&& o) noexcept
        : grid_(o.grid_), fwd_(std::exchange(o.fwd_, nullptr)), bwd_(std::exchange(o.bwd_, nullptr)) {}
    Fft2d& operator=(Fft2d&&) = delete;

    ~Fft2d() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }

    const Grid& grid() const { return grid_; }

    void forward(std::span<cplx> data) const {
        check(data);
        auto* p = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(fwd_, p, p);
    }

    void backward(std::span<cplx> data) const {
        check(data);
        auto* p = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(bwd_, p, p);
        const double s = 1.0 / static_cast<double>(grid_.size());
        for (auto& z : data) z *= s;
    }

private:
    void check(std::span<cplx> data) const {
        if (data.size() != grid_.size()) throw std::invalid_argument("FFT buffer size mismatch");
    }

    Grid grid_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Gradient of one plane given its forward transform `spec`.
inline void gradient_from_spectrum(const Fft2d& fft, std::span<const cplx> spec,
                                   std::vector<cplx>& gx, std::vector<cplx>& gy) {
    const Grid& g = fft.grid();
    gx.resize(g.size());
    gy.resize(g.size());
    const cplx I{0.0, 1.0};
    for (std::size_t j = 0; j < g.ny(); ++j) {
        const double ky = g.ky(j);
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            gx[k] = I * g.kx(i) * spec[k];
            gy[k] = I * ky * spec[k];
        }
    }
    fft.backward(gx);
    fft.backward(gy);
}

/// (∂f/∂x, ∂f/∂y) by multiplication with i·k in Fourier space.
inline std::pair<ScalarField, ScalarField> spectral_gradient(const ScalarField& f,
                                                             const Fft2d& fft) {
    require_same_grid(f.grid, fft.grid());
    std::vector<cplx> spec = f.comp[0];
    fft.forward(spec);
    std::pair<ScalarField, ScalarField> out{ScalarField(f.grid), ScalarField(f.grid)};
    gradient_from_spectrum(fft, spec, out.first.comp[0], out.second.comp[0]);
    return out;
}

inline std::pair<ScalarField, ScalarField> spectral_gradient(const ScalarField& f) {
    Fft2d fft(f.grid);
    return spectral_gradient(f, fft);
}

enum class SpinorInterp { spectral, bilinear };

/// Samples a complex field at arbitrary points.
///
/// `spectral` zero-pads the spectrum by `upsample` in each direction (the
/// Nyquist row/column is dropped) and evaluates a local Lagrange polynomial
/// of `order` points per axis on the refined grid. `bilinear` interpolates
/// each complex component on the original grid.
template <std::size_t NC>
class FieldSampler {
public:
    FieldSampler(const ComplexField<NC>& f, SpinorInterp mode, std::size_t upsample = 2,
                 std::size_t order = 8)
        : mode_(mode), order_(order) {
        if (mode == SpinorInterp::bilinear) {
            fine_ = f;
            return;
        }
        if (upsample < 1 || (upsample & (upsample - 1)) != 0)
            throw std::invalid_argument("upsample factor must be a power of two");
        if (order < 2 || order % 2 != 0 || order > 16)
            throw std::invalid_argument("Lagrange order must be even and in [2, 16]");
        const Grid& g = f.grid;
        const Grid fg(g.nx() * upsample, g.ny() * upsample, g.lx(), g.ly(), g.x_center(),
                      g.y_center());
        Fft2d coarse(g);
        Fft2d fine(fg);
        fine_ = ComplexField<NC>(fg);
        const double gain = static_cast<double>(fg.size()) / static_cast<double>(g.size());
        const std::size_t hx = g.nx() / 2, hy = g.ny() / 2;
        for (std::size_t c = 0; c < NC; ++c) {
            std::vector<cplx> spec = f.comp[c];
            coarse.forward(spec);
            auto& dst = fine_.comp[c];
            for (std::size_t j = 0; j < g.ny(); ++j) {
                if (j == hy) continue;
                const std::size_t fj = j < hy ? j : j + fg.ny() - g.ny();
                for (std::size_t i = 0; i < g.nx(); ++i) {
                    if (i == hx) continue;
                    const std::size_t fi = i < hx ? i : i + fg.nx() - g.nx();
                    dst[fg.index(fi, fj)] = gain * spec[g.index(i, j)];
                }
            }
            fine.backward(dst);
        }
    }

    explicit FieldSampler(const ComplexField<NC>& f)
        : FieldSampler(f, SpinorInterp::spectral) {}

    std::array<cplx, NC> operator()(Point p) const {
        if (mode_ == SpinorInterp::bilinear) return interpolate_bilinear(fine_, p);
        const Grid& g = fine_.grid;
        std::array<double, 16> wx{}, wy{};
        std::array<std::size_t, 16> ix{}, iy{};
        axis(p.x, g.xmin(), g.dx(), g.nx(), wx, ix);
        axis(p.y, g.ymin(), g.dy(), g.ny(), wy, iy);
        std::array<cplx, NC> v{};
        for (std::size_t c = 0; c < NC; ++c) {
            const auto& d = fine_.comp[c];
            cplx acc{0.0, 0.0};
            for (std::size_t b = 0; b < order_; ++b) {
                cplx row{0.0, 0.0};
                const std::size_t base = iy[b] * g.nx();
                for (std::size_t a = 0; a < order_; ++a) row += wx[a] * d[base + ix[a]];
                acc += wy[b] * row;
            }
            v[c] = acc;
        }
        return v;
    }

    const Grid& grid() const { return fine_.grid; }

private:
    void axis(double u, double umin, double h, std::size_t n, std::array<double, 16>& w,
              std::array<std::size_t, 16>& idx) const {
        const double nn = static_cast<double>(n);
        double s = std::fmod((u - umin) / h, nn);
        if (s < 0.0) s += nn;
        const double fl = std::floor(s);
        const double t = s - fl;
        const long i0 = static_cast<long>(fl);
        const long lo = -static_cast<long>(order_ / 2) + 1;
        for (std::size_t m = 0; m < order_; ++m) {
            const double xm = static_cast<double>(lo + static_cast<long>(m));
            double wm = 1.0;
            for (std::size_t q = 0; q < order_; ++q) {
                if (q == m) continue;
                const double xq = static_cast<double>(lo + static_cast<long>(q));
                wm *= (t - xq) / (xm - xq);
            }
            w[m] = wm;
            long k = (i0 + lo + static_cast<long>(m)) % static_cast<long>(n);
            if (k < 0) k += static_cast<long>(n);
            idx[m] = static_cast<std::size_t>(k);
        }
    }

    SpinorInterp mode_;
    std::size_t order_;
    ComplexField<NC> fine_;
};

}  // namespace ciphase
