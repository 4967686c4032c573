#pragma once

// Dynamical paths carried by the quantum-hydrodynamic flow ẋ = v(x, t).
// Every vertex is a material point; maintenance only inserts or drops
// interior vertices, never moves one, and never touches the endpoints.

#include <cmath>
#include <functional>
#include <optional>

#include "ciphase/observables.hpp"
#include "ciphase/phases.hpp"

namespace ciphase {

struct PathNode {
    Point last_velocity{};
    bool has_velocity = false;
    std::size_t masked_streak = 0;
};

struct AdvectedPath {
    PolylinePath path;
    std::vector<PathNode> nodes;
    bool valid = true;

    std::size_t size() const { return path.points.size(); }
};

/// Arc about the origin at `radius`, spanning ±half_angle around the azimuth
/// of `center`. The first point (a) is the counter-clockwise end.
inline AdvectedPath make_initial_arc(Point center, double radius, double half_angle,
                                     std::size_t n_points) {
    if (!(radius > 0.0)) throw std::invalid_argument("arc radius must be positive");
    if (n_points < 3) throw std::invalid_argument("an arc needs at least three points");
    if (!(half_angle > 0.0)) throw std::invalid_argument("arc half-angle must be positive");
    const double phi0 = std::atan2(center.y, center.x);
    AdvectedPath p;
    for (std::size_t k = 0; k < n_points; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n_points - 1);
        const double phi = phi0 + half_angle * (1.0 - 2.0 * t);
        p.path.points.push_back({radius * std::cos(phi), radius * std::sin(phi)});
    }
    p.path.validate();
    p.nodes.assign(n_points, PathNode{});
    return p;
}

/// Velocity at (x, t), or nullopt where it is not defined (masked).
using VelocityFn = std::function<std::optional<Point>(Point, double)>;

/// Velocity linearly interpolated in time between two observable
/// snapshots and bilinearly in space. Undefined where either snapshot's
/// stencil touches a masked node.
class SnapshotVelocity {
public:
    SnapshotVelocity(const ObservableSet& before, double t0, const ObservableSet& after, double t1)
        : before_(&before), after_(&after), t0_(t0), t1_(t1) {
        require_same_grid(before.grid(), after.grid());
    }

    std::optional<Point> operator()(Point p, double t) const {
        const Grid& g = before_->grid();
        if (!stencil_unmasked(g, before_->mask, p) || !stencil_unmasked(g, after_->mask, p))
            return std::nullopt;
        const double w = t1_ > t0_ ? std::clamp((t - t0_) / (t1_ - t0_), 0.0, 1.0) : 0.0;
        const Point v0{interpolate(before_->v.x, p), interpolate(before_->v.y, p)};
        const Point v1{interpolate(after_->v.x, p), interpolate(after_->v.y, p)};
        return (1.0 - w) * v0 + w * v1;
    }

private:
    const ObservableSet* before_;
    const ObservableSet* after_;
    double t0_, t1_;
};

namespace detail {

/// One classical RK4 step of size h for a single vertex. Where the field is
/// undefined the vertex's last valid velocity is used (zero if it never had
/// one).
inline void rk4_vertex(Point& x, PathNode& node, const VelocityFn& v, double t, double h) {
    auto eval = [&](Point p, double tt) {
        if (auto u = v(p, tt)) return *u;
        return node.has_velocity ? node.last_velocity : Point{};
    };
    const Point k1 = eval(x, t);
    const Point k2 = eval(x + (0.5 * h) * k1, t + 0.5 * h);
    const Point k3 = eval(x + (0.5 * h) * k2, t + 0.5 * h);
    const Point k4 = eval(x + h * k3, t + h);
    x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (auto u = v(x, t + h)) {
        node.last_velocity = *u;
        node.has_velocity = true;
    }
}

}  // namespace detail

/// One RK4 step of size h from time t for every vertex.
inline void advect_step(AdvectedPath& path, const VelocityFn& v, double t, double h) {
    for (std::size_t i = 0; i < path.size(); ++i)
        detail::rk4_vertex(path.path.points[i], path.nodes[i], v, t, h);
}

/// Advances from t0 to t1 in `substeps` equal RK4 steps.
inline void advect(AdvectedPath& path, const VelocityFn& v, double t0, double t1,
                   std::size_t substeps = 1) {
    if (substeps == 0) throw std::invalid_argument("substeps must be positive");
    const double h = (t1 - t0) / static_cast<double>(substeps);
    for (std::size_t s = 0; s < substeps; ++s)
        advect_step(path, v, t0 + static_cast<double>(s) * h, h);
}

/// Like advect(), but each vertex further shortens its own steps so that
/// no step moves it by more than `max_displacement` at the speed found at
/// the start of the step. Fast vertices near nodes are thus resolved
/// without refining the whole path. At most `max_steps` steps per vertex;
/// returns the largest count used.
inline std::size_t advect_limited(AdvectedPath& path, const VelocityFn& v, double t0, double t1,
                                  std::size_t substeps, double max_displacement,
                                  std::size_t max_steps = 4096) {
    if (substeps == 0) throw std::invalid_argument("substeps must be positive");
    if (!(max_displacement > 0.0)) throw std::invalid_argument("max_displacement must be positive");
    const double span = t1 - t0;
    const double h_base = span / static_cast<double>(substeps);
    std::size_t worst = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        Point& x = path.path.points[i];
        PathNode& node = path.nodes[i];
        double t = t0;
        std::size_t n = 0;
        while (t1 - t > 1e-12 * std::abs(span) && n < max_steps) {
            const auto u = v(x, t);
            const double speed = u ? norm(*u) : (node.has_velocity ? norm(node.last_velocity) : 0.0);
            double h = std::min(h_base, t1 - t);
            if (speed * h > max_displacement) h = max_displacement / speed;
            if (n + 1 == max_steps) h = t1 - t;
            detail::rk4_vertex(x, node, v, t, h);
            t += h;
            ++n;
        }
        worst = std::max(worst, n);
    }
    return worst;
}

struct SpacingBounds {
    double min = 0.0;
    double max = 0.0;
    double max_deviation = 0.0;  // largest allowed shift of the polyline when dropping a vertex
};

/// Restores vertex spacing. Long segments are split by inserting vertices on
/// the straight segment (geometry unchanged); an interior vertex closer than
/// `min` to its predecessor is dropped when that moves the polyline by no
/// more than `max_deviation` and keeps the merged segment within `max`.
/// Returns true if anything changed.
inline bool maintain(AdvectedPath& p, const SpacingBounds& b) {
    if (!(b.max > b.min) || !(b.min >= 0.0))
        throw std::invalid_argument("spacing bounds must satisfy 0 <= min < max");
    const auto& pts = p.path.points;
    std::vector<Point> out_pts{pts.front()};
    std::vector<PathNode> out_nodes{p.nodes.front()};
    bool changed = false;

    // Pass 1: drop crowded interior vertices.
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const Point prev = out_pts.back();
        const Point next = pts[i + 1];
        if (distance(prev, pts[i]) < b.min && distance(prev, next) <= b.max) {
            const Point d = next - prev;
            const double len = norm(d);
            const double dev =
                len > 0.0 ? std::abs(d.x * (pts[i].y - prev.y) - d.y * (pts[i].x - prev.x)) / len
                          : distance(prev, pts[i]);
            if (dev <= b.max_deviation) {
                changed = true;
                continue;
            }
        }
        out_pts.push_back(pts[i]);
        out_nodes.push_back(p.nodes[i]);
    }
    out_pts.push_back(pts.back());
    out_nodes.push_back(p.nodes.back());

    // Pass 2: split long segments.
    std::vector<Point> fin_pts{out_pts.front()};
    std::vector<PathNode> fin_nodes{out_nodes.front()};
    for (std::size_t i = 0; i + 1 < out_pts.size(); ++i) {
        const Point u = out_pts[i], w = out_pts[i + 1];
        const double len = distance(u, w);
        if (len > b.max) {
            const auto pieces = static_cast<std::size_t>(std::ceil(len / b.max));
            const PathNode& nu = out_nodes[i];
            const PathNode& nw = out_nodes[i + 1];
            for (std::size_t k = 1; k < pieces; ++k) {
                const double t = static_cast<double>(k) / static_cast<double>(pieces);
                PathNode n;
                n.has_velocity = nu.has_velocity && nw.has_velocity;
                n.last_velocity = (1.0 - t) * nu.last_velocity + t * nw.last_velocity;
                fin_pts.push_back(u + t * (w - u));
                fin_nodes.push_back(n);
            }
            changed = true;
        }
        fin_pts.push_back(w);
        fin_nodes.push_back(out_nodes[i + 1]);
    }
    p.path.points = std::move(fin_pts);
    p.nodes = std::move(fin_nodes);
    return changed;
}

/// Counts consecutive samples each vertex spends on masked nodes; the path
/// becomes permanently invalid once any vertex exceeds `limit`.
inline void update_validity(AdvectedPath& p, const Grid& g, const Mask& mask, std::size_t limit) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        PathNode& n = p.nodes[i];
        n.masked_streak = stencil_unmasked(g, mask, p.path.points[i]) ? 0 : n.masked_streak + 1;
        if (n.masked_streak > limit) p.valid = false;
    }
}

}  // namespace ciphase
