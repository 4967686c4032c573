#include <gtest/gtest.h>

#include <numbers>

#include "ciphase/analysis.hpp"
#include "ciphase/config.hpp"
#include "ciphase/observables.hpp"

using namespace ciphase;

TEST(Observables, PlaneWaveMomentum) {
    const Grid g(64, 64, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    SpinorField psi(g);
    for (std::size_t j = 0; j < 64; ++j)
        for (std::size_t i = 0; i < 64; ++i) {
            const std::size_t k = g.index(i, j);
            const double env = 1.0 + 0.5 * std::cos(g.y(j));
            psi.comp[0][k] = env * std::polar(0.6, 2.0 * g.x(i));
            psi.comp[1][k] = env * std::polar(0.8, 2.0 * g.x(i) + 1.0);
        }
    const MomentumField m = momentum_field(psi, 1.5);
    for (std::size_t k = 0; k < g.size(); ++k) {
        ASSERT_TRUE(m.mask[k]);
        EXPECT_NEAR(m.pi.x.data[k], 3.0, 1e-11);
        EXPECT_NEAR(m.pi.y.data[k], 0.0, 1e-11);
    }
}

TEST(Observables, InitialPolarizationPointsAwayFromCoupling) {
    const RunConfig cfg;
    const ModelParams model = cfg.model();
    const Grid g(128, 128, cfg.box_bohr, cfg.box_bohr);
    for (auto c : {InitialCase::a, InitialCase::b}) {
        const PolarizationField s = polarization(initial_state(c, model, g), cfg.density_floor);
        std::size_t unmasked = 0;
        for (std::size_t j = 0; j < g.ny(); ++j)
            for (std::size_t i = 0; i < g.nx(); ++i) {
                const std::size_t k = g.index(i, j);
                if (!s.mask[k]) continue;
                ++unmasked;
                const Point p = g.point(i, j);
                EXPECT_NEAR(s.s[0].data[k], -p.x / norm(p), 1e-12);
                EXPECT_NEAR(s.s[1].data[k], -p.y / norm(p), 1e-12);
                EXPECT_NEAR(s.s[2].data[k], 0.0, 1e-12);
            }
        EXPECT_GT(unmasked, 50u);
    }
}

TEST(Observables, ScalarStateIsLowerSurface) {
    const Grid g(32, 32, 20.0, 20.0);
    const ScalarField psi = initial_state_bo(InitialCase::b, RunConfig{}.model(), g);
    const PolarizationField s = polarization(psi, 1e-8);
    for (std::size_t k = 0; k < g.size(); ++k)
        if (s.mask[k]) {
            EXPECT_EQ(s.s[2].data[k], -1.0);
        }
}

TEST(Observables, VortexFieldOfGaugeB) {
    const RunConfig cfg;
    const ModelParams model = cfg.model();
    const Grid g(256, 256, cfg.box_bohr, cfg.box_bohr);
    const Fft2d fft(g);
    const ObservableSet oa = compute_observables(initial_state(InitialCase::a, model, g), fft, model.mass);
    const ObservableSet ob = compute_observables(initial_state(InitialCase::b, model, g), fft, model.mass);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            if (!ob.mask[k]) continue;
            const Point p = g.point(i, j);
            const double r2 = dot(p, p);
            EXPECT_NEAR(ob.pi.x.data[k], -p.y / (2.0 * r2), 1e-6 / std::sqrt(r2));
            EXPECT_NEAR(ob.pi.y.data[k], p.x / (2.0 * r2), 1e-6 / std::sqrt(r2));
            EXPECT_NEAR(ob.v.y.data[k], ob.pi.y.data[k] / model.mass, 1e-18);
            EXPECT_NEAR(oa.pi.x.data[k], 0.0, 1e-10);
        }
    EXPECT_LT(nonadiabaticity(oa), 1e-12);
    EXPECT_LT(nonadiabaticity(ob), 1e-12);
    EXPECT_LT(edge_density_ratio(oa.n), 1e-30);
}

TEST(Observables, DensityMaskUsesRelativeFloor) {
    const Grid g(8, 8, 1.0, 1.0);
    RealField n(g);
    n.data[3] = 10.0;
    n.data[5] = 1e-7;
    n.data[6] = 1e-6;
    const Mask m = density_mask(n, 1e-7);
    EXPECT_TRUE(m[3]);
    EXPECT_FALSE(m[5]);
    EXPECT_TRUE(m[6]);
    EXPECT_FALSE(m[0]);
}

TEST(Observables, AngularProfileOfRingHasNoNode) {
    const Grid g(128, 128, 20.0, 20.0);
    const RealField n = density(annular_vortex_state(g, 3.0, 0.4));
    const auto p = angular_profile(n, 1.0, 6.0, 360, 200);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    EXPECT_LT((*hi - *lo) / *hi, 1e-2);
    const std::size_t k = profile_minimum(p, 1.0, 0.3);
    EXPECT_GT(node_contrast(p, k, 0.5), 0.99);
}

TEST(Observables, NodeContrastFindsCut) {
    const Grid g(128, 128, 20.0, 20.0);
    SpinorField psi = annular_vortex_state(g, 3.0, 0.4);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i) {
            const double s = std::sin(0.5 * (azimuth(g.point(i, j)) - 1.0));
            for (auto& c : psi.comp) c[g.index(i, j)] *= s;
        }
    const RealField n = density(psi);
    const NodeComparison c = compare_nodes(n, {3.0 * std::cos(0.9), 3.0 * std::sin(0.9)},
                                           {3.0 * std::cos(1.1), 3.0 * std::sin(1.1)},
                                           density(annular_vortex_state(g, 3.0, 0.4)), 1.0, 6.0);
    EXPECT_NEAR(c.azimuth, 1.0, 0.02);
    EXPECT_LT(c.contrast_node, 5e-3);
    EXPECT_GT(c.contrast_other, 0.99);
    EXPECT_NEAR(phase_distance(mean_azimuth({1.0, -0.01}, {1.0, 0.01}), 0.0), 0.0, 1e-12);
}
