#pragma once

// Post-processing measurements on finished snapshots: the closed-loop
// winding check on a vortex state and the angular density profile used to
// locate and grade the node where the path endpoints meet.

#include <numbers>

#include "ciphase/model.hpp"
#include "ciphase/observables.hpp"
#include "ciphase/phases.hpp"

namespace ciphase {

/// Gauge-(b) ground frame times a real annular Gaussian envelope centred on
/// radius `radius` with spread `width`: the momentum field is the vortex
/// +ħ/(2r)e_φ of the case-(b) initial state, but the density surrounds the
/// intersection so a closed loop stays unmasked.
inline SpinorField annular_vortex_state(const Grid& g, double radius, double width) {
    SpinorField f(g);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const Point p = g.point(i, j);
            const double d = norm(p) - radius;
            const double env = std::exp(-d * d / (4.0 * width * width));
            const auto u = ground_frame(InitialCase::b, frame_azimuth(p));
            const std::size_t n = g.index(i, j);
            f.comp[0][n] = env * u[0];
            f.comp[1][n] = env * u[1];
        }
    normalize(f);
    return f;
}

/// Circulation of the gauge-(b) frame's connection −i⟨u|∇u⟩ around a loop
/// enclosing the intersection once counter-clockwise, taken with the sign
/// that makes π − ħA a pure gradient.
inline double frame_b_connection_circulation() { return -std::numbers::pi; }

struct WindingStudy {
    std::size_t n_grid = 0;
    std::size_t n_points = 0;
    WindingResult result;
};

/// Winding check on the annular vortex state for a circle of radius
/// `radius` about the intersection. The loop is sampled every
/// `spacing_dx` grid spacings, as advected paths are, so loop and grid
/// refine together.
inline WindingStudy winding_study(std::size_t n_grid, double box, double radius, double width,
                                  double spacing_dx = 0.25, double hbar = 1.0) {
    const Grid g(n_grid, n_grid, box, box);
    const auto n_points = static_cast<std::size_t>(
        std::ceil(2.0 * std::numbers::pi * radius / (spacing_dx * std::min(g.dx(), g.dy()))));
    const SpinorField psi = annular_vortex_state(g, radius, width);
    const MomentumField m = momentum_field(psi, hbar);
    return {n_grid, n_points,
            winding_number(m.pi, m.mask, circle_path({0.0, 0.0}, radius, n_points),
                           frame_b_connection_circulation(), hbar)};
}

/// Radially integrated density P(φ) = ∫ n(r, φ) r dr on `n_phi` rays over
/// [r_min, r_max], bilinear in space, trapezoidal in r.
inline std::vector<double> angular_profile(const RealField& n, double r_min, double r_max,
                                           std::size_t n_phi, std::size_t n_r) {
    if (!(r_max > r_min) || !(r_min >= 0.0) || n_phi < 4 || n_r < 2)
        throw std::invalid_argument("invalid angular profile sampling");
    std::vector<double> out(n_phi, 0.0);
    const double dr = (r_max - r_min) / static_cast<double>(n_r - 1);
    for (std::size_t k = 0; k < n_phi; ++k) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_phi);
        double s = 0.0;
        for (std::size_t m = 0; m < n_r; ++m) {
            const double r = r_min + static_cast<double>(m) * dr;
            const double w = (m == 0 || m + 1 == n_r) ? 0.5 : 1.0;
            s += w * r * interpolate(n, {r * std::cos(phi), r * std::sin(phi)});
        }
        out[k] = s * dr;
    }
    return out;
}

inline double profile_azimuth(std::size_t k, std::size_t n_phi) {
    return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_phi);
}

/// Index of the deepest point of `profile` within `window` rad of `phi0`.
inline std::size_t profile_minimum(const std::vector<double>& profile, double phi0, double window) {
    std::size_t best = profile.size();
    for (std::size_t k = 0; k < profile.size(); ++k) {
        if (phase_distance(profile_azimuth(k, profile.size()), phi0) > window) continue;
        if (best == profile.size() || profile[k] < profile[best]) best = k;
    }
    if (best == profile.size()) throw std::invalid_argument("empty profile window");
    return best;
}

/// P(φ_node) divided by the smaller of the two neighbouring maxima found
/// within `window` rad on either side. Small values mean a deep node.
inline double node_contrast(const std::vector<double>& profile, std::size_t node, double window) {
    const std::size_t n = profile.size();
    const auto reach = static_cast<std::size_t>(window / (2.0 * std::numbers::pi) * static_cast<double>(n));
    double left = 0.0, right = 0.0;
    for (std::size_t d = 1; d <= reach; ++d) {
        right = std::max(right, profile[(node + d) % n]);
        left = std::max(left, profile[(node + n - d % n) % n]);
    }
    const double peak = std::min(left, right);
    if (!(peak > 0.0)) throw std::invalid_argument("no density around the node window");
    return profile[node] / peak;
}

/// Circular mean of two azimuths.
inline double mean_azimuth(Point a, Point b) {
    const double x = std::cos(azimuth(a)) + std::cos(azimuth(b));
    const double y = std::sin(azimuth(a)) + std::sin(azimuth(b));
    return azimuth({x, y});
}

struct NodeComparison {
    double azimuth = 0.0;         // rad, node position in the node-bearing run
    double contrast_node = 0.0;   // node-bearing run
    double contrast_other = 0.0;  // other run, same azimuth
};

/// Compares the angular density profiles of two runs at the azimuth where
/// the path endpoints of the node-bearing run meet: the node is the deepest
/// profile point within `search` rad of the endpoints' circular mean, and
/// each contrast uses neighbouring maxima within `window` rad.
inline NodeComparison compare_nodes(const RealField& n_node, Point a, Point b, const RealField& n_other,
                                    double r_min, double r_max, std::size_t n_phi = 720,
                                    std::size_t n_r = 400, double search = 0.2, double window = 0.5) {
    const auto pn = angular_profile(n_node, r_min, r_max, n_phi, n_r);
    const auto po = angular_profile(n_other, r_min, r_max, n_phi, n_r);
    const std::size_t k = profile_minimum(pn, mean_azimuth(a, b), search);
    return {profile_azimuth(k, n_phi), node_contrast(pn, k, window), node_contrast(po, k, window)};
}

}  // namespace ciphase
