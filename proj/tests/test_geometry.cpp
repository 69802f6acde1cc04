#include "support.hpp"

#include "pinv/errors.hpp"
#include "pinv/geometry.hpp"
#include "pinv/random_fields.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pinv {
namespace {

using test::sample;
using test::unit_grid;

TEST(Grid, SnapsThetaToNode) {
    Grid g = Grid::make_1d(0.0, 1.0, 11, 1.0, 30, 0.51);
    EXPECT_EQ(g.theta_index(), 15);
    EXPECT_DOUBLE_EQ(g.theta(), 0.5);
}

TEST(Grid, RejectsTooFewNodes) {
    EXPECT_THROW(Grid::make_1d(0.0, 1.0, 4, 1.0, 20, 0.5), Error);
    EXPECT_THROW(Grid::make_1d(0.0, 1.0, 20, 1.0, 4, 0.5), Error);
    EXPECT_THROW(Grid::make_1d(0.0, 1.0, 20, 1.0, 20, 1.0), Error);
}

TEST(Grid, RefinedHalvesSpacing) {
    Grid g = unit_grid(21, 40);
    Grid r = g.refined();
    EXPECT_EQ(r.nx(0), 41);
    EXPECT_EQ(r.nt(), 80);
    EXPECT_DOUBLE_EQ(r.dx(0), g.dx(0) / 2);
    EXPECT_DOUBLE_EQ(r.theta(), g.theta());
}

TEST(Grid, TwoDimensionalBoundary) {
    Grid g = Grid::make_2d({0.0, 0.0}, {1.0, 2.0}, {11, 21}, 1.0, 10, 0.5);
    EXPECT_EQ(g.nodes(), 231);
    EXPECT_TRUE(g.on_boundary(g.index(0, 5)));
    EXPECT_TRUE(g.on_boundary(g.index(5, 20)));
    EXPECT_FALSE(g.on_boundary(g.index(5, 5)));
    auto nu = outward_normal(g, g.index(5, 20));
    EXPECT_DOUBLE_EQ(nu[0], 0.0);
    EXPECT_DOUBLE_EQ(nu[1], 1.0);
}

TEST(Mask, BoxGammaAndSubset) {
    Grid g = unit_grid(101);
    SubdomainMask omega = box_mask(g, "omega", {0.0, 0.0}, {0.4, 0.0});
    SubdomainMask inner = box_mask(g, "inner", {0.1, 0.0}, {0.3, 0.0});
    EXPECT_EQ(omega.count(), 41);
    ASSERT_EQ(omega.gamma.size(), 1u);
    EXPECT_EQ(omega.gamma[0], 0);
    EXPECT_TRUE(inner.gamma.empty());
    EXPECT_TRUE(inner.subset_of(omega));
    EXPECT_FALSE(omega.subset_of(inner));
    SubdomainMask rest = complement(g, omega, "rest");
    EXPECT_EQ(rest.count() + omega.count(), g.nodes());
}

TEST(L2Norm, ZeroField) {
    Grid g = unit_grid();
    EXPECT_EQ(l2_norm(g, SpaceTimeField(g)), 0.0);
}

TEST(L2Norm, ConstantOneHasUnitNorm) {
    Grid g = unit_grid();
    EXPECT_NEAR(l2_norm(g, SpaceTimeField(g, 1.0)), 1.0, 1e-12);
}

TEST(L2Norm, SineMatchesClosedForm) {
    Grid g = unit_grid(201, 10);
    SpaceTimeField f = sample(g, [](double x, double) { return std::sin(M_PI * x); });
    EXPECT_NEAR(l2_norm(g, f), std::sqrt(0.5), 1e-4);
}

TEST(L2Norm, TimeWindowRestricts) {
    Grid g = unit_grid(21, 40);
    SpaceTimeField one(g, 1.0);
    EXPECT_NEAR(l2_norm(g, one, nullptr, {g.theta_index(), g.nt()}), std::sqrt(0.5), 1e-12);
}

TEST(L2Norm, Homogeneity) {
    Grid g = unit_grid();
    Rng rng(3);
    SpaceTimeField f = random_spacetime_field(g, rng, 4, 1.0);
    for (double c : {-3.0, 0.25, 7.5}) EXPECT_NEAR(l2_norm(g, c * f), std::abs(c) * l2_norm(g, f), 1e-13);
}

TEST(L2Norm, TriangleInequality) {
    Grid g = unit_grid();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        SpaceTimeField f = random_spacetime_field(g, rng, 4, 1.0);
        SpaceTimeField h = random_spacetime_field(g, rng, 4, 1.0);
        EXPECT_LE(l2_norm(g, f + h), l2_norm(g, f) + l2_norm(g, h) + 1e-14);
    }
}

TEST(L2Norm, RegionMonotone) {
    Grid g = unit_grid(81);
    SubdomainMask omega = box_mask(g, "omega", {0.2, 0.0}, {0.7, 0.0});
    SubdomainMask inner = box_mask(g, "inner", {0.3, 0.0}, {0.5, 0.0});
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        SpaceTimeField f = random_spacetime_field(g, rng, 5, 1.0);
        auto w = TimeWindow::full(g);
        EXPECT_LE(l2_norm(g, f, &inner, w), l2_norm(g, f, &omega, w));
        EXPECT_LE(l2_norm(g, f, &omega, w), l2_norm(g, f, nullptr, w));
    }
}

TEST(W21Norm, ZeroField) {
    Grid g = unit_grid();
    EXPECT_EQ(w21_norm(g, SpaceTimeField(g), nullptr, TimeWindow::full(g)), 0.0);
}

TEST(W21Norm, LinearFieldSumsNorms) {
    Grid g = unit_grid(201, 20);
    SpaceTimeField f = sample(g, [](double x, double) { return x; });
    EXPECT_NEAR(w21_norm(g, f, nullptr, TimeWindow::full(g)), 1.0 / std::sqrt(3.0) + 1.0, 1e-4);
}

TEST(W21Norm, HeatSolutionMatchesDenseQuadrature) {
    Grid g = unit_grid(201, 2000);
    SpaceTimeField f = sample(g, [](double x, double t) { return std::sin(M_PI * x) * std::exp(-M_PI * M_PI * t); });
    // Each term integrates sin^2 or cos^2 over x against exp(-2 pi^2 t) over t.
    const double decay = (1.0 - std::exp(-2 * M_PI * M_PI)) / (2 * M_PI * M_PI);
    const double base = std::sqrt(0.5 * decay);
    const double oracle = base * (1.0 + M_PI + M_PI * M_PI + M_PI * M_PI);
    EXPECT_NEAR(w21_norm(g, f, nullptr, TimeWindow::full(g)), oracle, 0.01 * oracle);
}

TEST(W42Norm, DominatesW21) {
    Grid g = unit_grid(81, 200);
    SpaceTimeField f = sample(g, [](double x, double t) { return std::sin(M_PI * x) * (1 + t); });
    auto w = TimeWindow::full(g);
    EXPECT_GE(w42_norm(g, f, nullptr, w), w21_norm(g, f, nullptr, w));
}

TEST(SpaceTimeField, ArithmeticAndLevels) {
    Grid g = unit_grid(11, 10);
    SpaceTimeField f(g, 2.0);
    SpaceTimeField h(g, 0.5);
    SpaceTimeField s = f - h;
    EXPECT_DOUBLE_EQ(s(3, 4), 1.5);
    s *= 2.0;
    EXPECT_DOUBLE_EQ(s.max_abs(), 3.0);
    SpatialField lvl(static_cast<std::size_t>(g.nodes()), -4.0);
    s.set_level(5, lvl);
    EXPECT_EQ(s.level(5), lvl);
    EXPECT_DOUBLE_EQ(s.max_abs(), 4.0);
    EXPECT_TRUE(s.matches(g));
    EXPECT_FALSE(s.matches(unit_grid(12, 10)));
}

}  // namespace
}  // namespace pinv
