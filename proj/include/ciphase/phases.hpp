#pragma once

// Phase bookkeeping along a path γ from x_a to x_b through a wavefunction
// snapshot:
//   Θ_ab  = arg⟨Ψ(x_a)|Ψ(x_b)⟩                       (total, principal branch)
//   Γ_n   = (1/ħ) ∫_γ π·dx                            (nuclear, accumulated)
//   Γ_el  = Θ_ab − Γ_n  reduced to (−π, π]             (electronic, production)
// plus an independent discrete Pancharatnam estimate of Γ_el and the
// closed-loop winding check Σ∮(π + ħA)·dx = 2πħ n.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "ciphase/fft.hpp"
#include "ciphase/grid.hpp"
#include "ciphase/observables.hpp"

namespace ciphase {

/// Reduces an angle to (−π, π].
inline double wrap_phase(double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(x, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

/// Distance between two angles on the circle.
inline double phase_distance(double a, double b) { return std::abs(wrap_phase(a - b)); }

struct PolylinePath {
    std::vector<Point> points;
    bool closed = false;

    void validate() const {
        if (points.size() < 2) throw std::invalid_argument("a path needs at least two points");
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
            if (points[i] == points[i + 1])
                throw std::invalid_argument("consecutive path points must be distinct");
    }

    Point a() const { return points.front(); }
    Point b() const { return points.back(); }

    double length() const {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < points.size(); ++i) s += distance(points[i], points[i + 1]);
        if (closed) s += distance(points.back(), points.front());
        return s;
    }

    PolylinePath reversed() const {
        return {std::vector<Point>(points.rbegin(), points.rend()), closed};
    }
};

/// Interior points of the straight segment b → a, spaced at most `spacing`.
inline std::vector<Point> closing_points(const PolylinePath& path, double spacing) {
    const Point from = path.b(), to = path.a();
    const double len = distance(from, to);
    const auto pieces = static_cast<std::size_t>(std::ceil(len / spacing));
    std::vector<Point> out;
    for (std::size_t k = 1; k < pieces; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(pieces);
        out.push_back(from + t * (to - from));
    }
    return out;
}

/// Vertex sequence of the path, with the closing segment b → a sampled and
/// the start point repeated at the end when the path is closed.
inline std::vector<Point> traversal(const PolylinePath& path, double closing_spacing) {
    std::vector<Point> pts = path.points;
    if (path.closed) {
        for (Point p : closing_points(path, closing_spacing)) pts.push_back(p);
        pts.push_back(path.a());
    }
    return pts;
}

// --- total phase ------------------------------------------------------------

struct ThetaResult {
    double theta = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
    bool valid = false;
};

/// arg⟨Ψ(x_a)|Ψ(x_b)⟩. Invalid when either endpoint density or the overlap
/// magnitude falls below `abs_floor` (= ε_floor · max n).
template <class Sampler>
ThetaResult theta_ab(const Sampler& sample, const PolylinePath& path, double abs_floor) {
    const auto pa = sample(path.a());
    const auto pb = sample(path.b());
    cplx ov{0.0, 0.0};
    ThetaResult r;
    for (std::size_t c = 0; c < pa.size(); ++c) {
        ov += std::conj(pa[c]) * pb[c];
        r.n_a += std::norm(pa[c]);
        r.n_b += std::norm(pb[c]);
    }
    r.theta = std::arg(ov);
    if (r.theta == -std::numbers::pi) r.theta = std::numbers::pi;
    r.valid = r.n_a >= abs_floor && r.n_b >= abs_floor && std::abs(ov) >= abs_floor;
    return r;
}

// --- nuclear phase ----------------------------------------------------------

struct LineIntegral {
    double value = 0.0;
    bool masked_crossing = false;
};

/// (1/ħ) ∫ π·dx along the polyline by the composite trapezoidal rule with
/// bilinearly interpolated π. Not branch-reduced. A closed path includes
/// the straight segment b → a.
inline LineIntegral gamma_n(const VectorField& pi, const Mask& mask, const PolylinePath& path,
                            double hbar = 1.0) {
    path.validate();
    const Grid& g = pi.grid();
    const std::vector<Point> pts = traversal(path, 0.5 * std::min(g.dx(), g.dy()));
    LineIntegral out;
    Point prev_v{interpolate(pi.x, pts[0]), interpolate(pi.y, pts[0])};
    out.masked_crossing = !stencil_unmasked(g, mask, pts[0]);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const Point v{interpolate(pi.x, pts[i]), interpolate(pi.y, pts[i])};
        out.value += 0.5 * dot(prev_v + v, pts[i] - pts[i - 1]);
        if (!stencil_unmasked(g, mask, pts[i])) out.masked_crossing = true;
        prev_v = v;
    }
    out.value /= hbar;
    return out;
}

/// Off-grid sampler of a wavefunction and of its momentum field. The
/// amplitudes and their spectral gradients are interpolated with the same
/// scheme, so π(x) = ħ Im Σ Ψc*∇Ψc / n is evaluated pointwise rather than
/// interpolated from grid values, which stays accurate near nodes.
template <std::size_t NC>
class PathSampler {
public:
    struct Local {
        std::array<cplx, NC> psi;
        Point pi;
        double n = 0.0;
    };

    PathSampler(const ComplexField<NC>& psi, const Fft2d& fft, SpinorInterp mode = SpinorInterp::spectral,
                std::size_t upsample = 2, std::size_t order = 8, double hbar = 1.0)
        : amp_(psi, mode, upsample, order), grad_(gradients(psi, fft), mode, upsample, order),
          hbar_(hbar) {}

    std::array<cplx, NC> operator()(Point p) const { return amp_(p); }

    Local local(Point p) const {
        Local l;
        l.psi = amp_(p);
        const auto gr = grad_(p);
        double jx = 0.0, jy = 0.0;
        for (std::size_t c = 0; c < NC; ++c) {
            l.n += std::norm(l.psi[c]);
            jx += (std::conj(l.psi[c]) * gr[c]).imag();
            jy += (std::conj(l.psi[c]) * gr[NC + c]).imag();
        }
        if (l.n > 0.0) l.pi = {hbar_ * jx / l.n, hbar_ * jy / l.n};
        return l;
    }

    double hbar() const { return hbar_; }

private:
    static ComplexField<2 * NC> gradients(const ComplexField<NC>& psi, const Fft2d& fft) {
        require_same_grid(psi.grid, fft.grid());
        ComplexField<2 * NC> g(psi.grid);
        std::vector<cplx> spec;
        for (std::size_t c = 0; c < NC; ++c) {
            spec = psi.comp[c];
            fft.forward(spec);
            gradient_from_spectrum(fft, spec, g.comp[c], g.comp[NC + c]);
        }
        return g;
    }

    FieldSampler<NC> amp_;
    FieldSampler<2 * NC> grad_;
    double hbar_;
};

namespace detail {

template <std::size_t NC>
struct SimpsonState {
    const PathSampler<NC>& s;
    double abs_floor;
    std::size_t max_depth;
    std::size_t evaluations = 0;
    bool masked = false;

    double integrand(Point p0, Point d, double t) {
        const auto l = s.local(p0 + t * d);
        ++evaluations;
        if (l.n < abs_floor) masked = true;
        return dot(l.pi, d);
    }

    double refine(Point p0, Point d, double a, double b, double fa, double fm, double fb,
                  double whole, double tol, std::size_t depth) {
        const double m = 0.5 * (a + b);
        const double flm = integrand(p0, d, 0.5 * (a + m));
        const double frm = integrand(p0, d, 0.5 * (m + b));
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double err = left + right - whole;
        if (depth >= max_depth || std::abs(err) <= 15.0 * tol)
            return left + right + err / 15.0;
        return refine(p0, d, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               refine(p0, d, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
};

}  // namespace detail

/// (1/ħ) ∫ π·dx along the polyline with π evaluated pointwise by `s`, each
/// segment integrated by adaptive Simpson quadrature to `tol` rad. Not
/// branch-reduced. A closed path includes the straight segment b → a.
/// The masked flag is raised if any quadrature node has density below
/// `abs_floor`.
template <std::size_t NC>
LineIntegral gamma_n(const PathSampler<NC>& s, const Grid& g, const PolylinePath& path,
                     double abs_floor, double tol = 1e-9, std::size_t max_depth = 24) {
    path.validate();
    const std::vector<Point> pts = traversal(path, 0.5 * std::min(g.dx(), g.dy()));
    detail::SimpsonState<NC> st{s, abs_floor, max_depth};
    const double seg_tol = tol / static_cast<double>(pts.size() - 1);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point p0 = pts[i];
        const Point d = pts[i + 1] - pts[i];
        const double fa = st.integrand(p0, d, 0.0);
        const double fm = st.integrand(p0, d, 0.5);
        const double fb = st.integrand(p0, d, 1.0);
        const double whole = (fa + 4.0 * fm + fb) / 6.0;
        total += st.refine(p0, d, 0.0, 1.0, fa, fm, fb, whole, seg_tol, 0);
    }
    return {total / s.hbar(), st.masked};
}

/// Γ_el = Θ − Γ_n on (−π, π].
inline double gamma_el_residual(double theta, double gamma_n) { return wrap_phase(theta - gamma_n); }

// --- Pancharatnam phase -----------------------------------------------------

struct PancharatnamResult {
    double phase = 0.0;
    double min_overlap = 1.0;  // smallest |⟨u_i|u_{i+1}⟩|
    bool degenerate = false;   // a zero state vector in the chain
    bool masked = false;       // a sample point touched a masked node
    bool under_resolved() const { return min_overlap < 0.9; }
};

/// Gauge-invariant discrete open-path phase of a state sequence u_0..u_m:
///   arg⟨u_0|u_m⟩ − Σ arg⟨u_i|u_{i+1}⟩ = arg[⟨u_0|u_m⟩ Π ⟨u_{i+1}|u_i⟩].
/// Vectors need not be normalized. For a closed chain (u_m ∝ u_0) this is
/// the discrete Berry phase.
template <std::size_t NC>
PancharatnamResult pancharatnam_phase(std::span<const std::array<cplx, NC>> states) {
    if (states.size() < 2) throw std::invalid_argument("need at least two states");
    auto overlap = [](const std::array<cplx, NC>& l, const std::array<cplx, NC>& r) {
        cplx s{0.0, 0.0};
        for (std::size_t c = 0; c < NC; ++c) s += std::conj(l[c]) * r[c];
        return s;
    };
    auto nrm = [&](const std::array<cplx, NC>& v) { return std::sqrt(std::abs(overlap(v, v))); };
    PancharatnamResult r;
    cplx prod = overlap(states.front(), states.back());
    if (std::abs(prod) > 0.0) prod /= std::abs(prod);
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
        const cplx o = overlap(states[i + 1], states[i]);
        const double scale = nrm(states[i]) * nrm(states[i + 1]);
        if (scale == 0.0) {
            r.degenerate = true;
            continue;
        }
        r.min_overlap = std::min(r.min_overlap, std::abs(o) / scale);
        if (std::abs(o) > 0.0) prod *= o / std::abs(o);
    }
    r.phase = std::arg(prod);
    if (r.phase == -std::numbers::pi) r.phase = std::numbers::pi;
    return r;
}

/// Pancharatnam phase of the conditional electronic states Ψ(x_i)/√n(x_i)
/// sampled along the path.
template <class Sampler>
PancharatnamResult pancharatnam_phase(const Sampler& sample, const Grid& g, const Mask& mask,
                                      const PolylinePath& path) {
    path.validate();
    const std::vector<Point> pts = traversal(path, 0.5 * std::min(g.dx(), g.dy()));
    using State = decltype(sample(pts[0]));
    std::vector<State> states;
    states.reserve(pts.size());
    bool masked = false;
    for (Point p : pts) {
        states.push_back(sample(p));
        if (!stencil_unmasked(g, mask, p)) masked = true;
    }
    auto r = pancharatnam_phase<std::tuple_size_v<State>>(states);
    r.masked = masked;
    return r;
}

// --- winding ----------------------------------------------------------------

struct WindingResult {
    long n = 0;
    double circulation = 0.0;  // ∮π·dx/ħ
    double residual = 0.0;     // |circulation + connection − 2πn|
    bool masked = false;
    bool poorly_resolved() const { return residual > 0.2; }
};

/// Integer n with ∮π·dx/ħ + ∮A·dx = 2πn for a closed loop. The connection
/// circulation is supplied by the caller.
inline WindingResult winding_number(const VectorField& pi, const Mask& mask, PolylinePath loop,
                                    double connection_circulation, double hbar = 1.0) {
    loop.closed = true;
    const LineIntegral li = gamma_n(pi, mask, loop, hbar);
    WindingResult w;
    w.circulation = li.value;
    w.masked = li.masked_crossing;
    const double total = li.value + connection_circulation;
    w.n = std::lround(total / (2.0 * std::numbers::pi));
    w.residual = std::abs(total - 2.0 * std::numbers::pi * static_cast<double>(w.n));
    return w;
}

/// Circle of `n_points` about `center`, counter-clockwise from azimuth 0.
inline PolylinePath circle_path(Point center, double radius, std::size_t n_points) {
    PolylinePath p;
    p.closed = true;
    for (std::size_t k = 0; k < n_points; ++k) {
        const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_points);
        p.points.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
    }
    return p;
}

// --- per-snapshot record ----------------------------------------------------

struct PhaseRecord {
    double t_fs = 0.0;
    double gamma_n = 0.0;
    double gamma_el = 0.0;
    double gamma_el_pancharatnam = 0.0;
    double theta_ab = 0.0;
    double n_a = 0.0;
    double n_b = 0.0;
    double min_overlap = 1.0;
    bool theta_valid = false;
    bool gamma_n_valid = false;
    bool pancharatnam_valid = false;
    bool path_valid = true;

    bool valid() const { return theta_valid && gamma_n_valid && pancharatnam_valid && path_valid; }
};

/// All phases of one snapshot along one path.
template <std::size_t NC>
PhaseRecord compute_phase_record(const PathSampler<NC>& sample, const ObservableSet& obs,
                                 const PolylinePath& path, double relative_floor) {
    PhaseRecord r;
    const double abs_floor = relative_floor * obs.n_max;
    const ThetaResult th = theta_ab(sample, path, abs_floor);
    const LineIntegral gn = gamma_n(sample, obs.grid(), path, abs_floor);
    const PancharatnamResult pp = pancharatnam_phase(sample, obs.grid(), obs.mask, path);
    r.theta_ab = path.closed ? 0.0 : th.theta;
    r.n_a = th.n_a;
    r.n_b = th.n_b;
    r.gamma_n = gn.value;
    r.gamma_el = gamma_el_residual(r.theta_ab, r.gamma_n);
    r.gamma_el_pancharatnam = pp.phase;
    r.min_overlap = pp.min_overlap;
    r.theta_valid = th.valid;
    r.gamma_n_valid = !gn.masked_crossing;
    r.pancharatnam_valid = !pp.masked && !pp.degenerate;
    return r;
}

}  // namespace ciphase
