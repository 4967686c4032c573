#include <gtest/gtest.h>

#include <numbers>

#include "ciphase/fft.hpp"
#include "ciphase/units.hpp"

using namespace ciphase;

TEST(Units, ReferenceConversions) {
    EXPECT_DOUBLE_EQ(convert_units(1.0, Unit::amu, Unit::electron_mass), 1822.888486209);
    EXPECT_DOUBLE_EQ(convert_units(1000.0, Unit::wavenumber, Unit::hartree), 4.556335252912e-3);
    EXPECT_NEAR(fs_to_au(1.0), 41.341373335, 1e-12);
    EXPECT_NEAR(au_to_fs(fs_to_au(150.0)), 150.0, 1e-12);
    EXPECT_THROW(convert_units(1.0, Unit::amu, Unit::hartree), std::invalid_argument);
    EXPECT_EQ(parse_unit("cm-1"), Unit::wavenumber);
    EXPECT_THROW(parse_unit("furlong"), std::invalid_argument);
}

TEST(Grid, CoordinatesAndWavenumbers) {
    const Grid g(16, 8, 8.0, 4.0);
    EXPECT_DOUBLE_EQ(g.dx(), 0.5);
    EXPECT_DOUBLE_EQ(g.x(0), -4.0);
    EXPECT_DOUBLE_EQ(g.y(7), 1.5);
    EXPECT_EQ(g.index(3, 2), 35u);
    EXPECT_DOUBLE_EQ(g.kx(1), 2.0 * std::numbers::pi / 8.0);
    EXPECT_DOUBLE_EQ(g.kx(8), -8.0 * 2.0 * std::numbers::pi / 8.0);
    EXPECT_DOUBLE_EQ(g.kx(15), -2.0 * std::numbers::pi / 8.0);
}

TEST(Grid, RejectsBadShapes) {
    EXPECT_THROW(Grid(12, 16, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(Grid(4, 16, 1.0, 1.0), std::invalid_argument);
    EXPECT_THROW(Grid(16, 16, 0.0, 1.0), std::invalid_argument);
}

TEST(Grid, AzimuthBranchCut) {
    EXPECT_DOUBLE_EQ(azimuth({1.0, 0.0}), 0.0);
    EXPECT_NEAR(azimuth({1.0, -1e-12}), 2.0 * std::numbers::pi, 1e-11);
    EXPECT_DOUBLE_EQ(azimuth({-1.0, 0.0}), std::numbers::pi);
}

TEST(Grid, BilinearExactForLinearFields) {
    const Grid g(16, 16, 4.0, 4.0);
    RealField f(g);
    for (std::size_t j = 0; j < 16; ++j)
        for (std::size_t i = 0; i < 16; ++i) f(i, j) = 2.0 * g.x(i) - 3.0 * g.y(j) + 1.0;
    for (Point p : {Point{0.13, -0.71}, Point{1.2, 0.4}, Point{-1.9, 1.3}})
        EXPECT_NEAR(interpolate(f, p), 2.0 * p.x - 3.0 * p.y + 1.0, 1e-12);
}

TEST(Fft, RoundTripIsIdentity) {
    const Grid g(32, 16, 5.0, 3.0);
    const Fft2d fft(g);
    std::vector<cplx> v(g.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = {std::sin(0.3 * k), std::cos(0.7 * k)};
    const auto orig = v;
    fft.forward(v);
    fft.backward(v);
    for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(std::abs(v[k] - orig[k]), 0.0, 1e-13);
}

TEST(Fft, SpectralGradientOfPlaneWave) {
    const Grid g(32, 32, 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    ScalarField f(g);
    for (std::size_t j = 0; j < 32; ++j)
        for (std::size_t i = 0; i < 32; ++i)
            f.comp[0][g.index(i, j)] = std::polar(1.0, 3.0 * g.x(i) - 2.0 * g.y(j));
    const auto [gx, gy] = spectral_gradient(f);
    const cplx I{0.0, 1.0};
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(std::abs(gx.comp[0][k] - 3.0 * I * f.comp[0][k]), 0.0, 1e-11);
        EXPECT_NEAR(std::abs(gy.comp[0][k] + 2.0 * I * f.comp[0][k]), 0.0, 1e-11);
    }
}

TEST(Fft, SpectralSamplerReproducesBandLimitedField) {
    const Grid g(32, 32, 10.0, 10.0);
    ScalarField f(g);
    auto exact = [](Point p) { return std::polar(std::exp(-0.5 * dot(p, p)), 0.8 * p.x); };
    for (std::size_t j = 0; j < 32; ++j)
        for (std::size_t i = 0; i < 32; ++i) f.comp[0][g.index(i, j)] = exact(g.point(i, j));
    const FieldSampler<1> s(f, SpinorInterp::spectral, 2, 8);
    const FieldSampler<1> b(f, SpinorInterp::bilinear);
    double err_s = 0.0, err_b = 0.0;
    for (Point p : {Point{0.11, 0.23}, Point{-0.77, 0.41}, Point{1.03, -0.59}}) {
        err_s = std::max(err_s, std::abs(s(p)[0] - exact(p)));
        err_b = std::max(err_b, std::abs(b(p)[0] - exact(p)));
    }
    EXPECT_LT(err_s, 1e-6);
    EXPECT_LT(err_s, 0.01 * err_b);
}
