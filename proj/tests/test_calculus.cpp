#include "support.hpp"

#include "pinv/calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pinv {
namespace {

using test::max_abs_diff;
using test::sample;
using test::unit_grid;

TEST(Stencils, ExactOnQuadratics) {
    Grid g = unit_grid(21);
    SpatialField f = sample(g, [](double x) { return 3 * x * x - x + 2; });
    EXPECT_LT(max_abs_diff(d1(g, f, 0), sample(g, [](double x) { return 6 * x - 1; })), 1e-11);
    EXPECT_LT(max_abs_diff(d2(g, f, 0), sample(g, [](double) { return 6.0; })), 1e-9);
    EXPECT_LT(max_abs_diff(laplacian(g, f), d2(g, f, 0)), 1e-12);
}

TEST(Stencils, SecondOrderOnSine) {
    double prev = 0.0;
    for (int nx : {41, 81}) {
        Grid g = unit_grid(nx);
        SpatialField f = sample(g, [](double x) { return std::sin(2 * x); });
        double err = max_abs_diff(d1(g, f, 0), sample(g, [](double x) { return 2 * std::cos(2 * x); }));
        if (prev > 0) EXPECT_GT(prev / err, 3.5);
        prev = err;
    }
}

TEST(Stencils, HigherDerivative) {
    Grid g = unit_grid(201);
    SpatialField f = sample(g, [](double x) { return std::sin(x); });
    SpatialField d4 = dn(g, f, 0, 4);
    for (int n = 10; n < g.nodes() - 10; ++n) EXPECT_NEAR(d4[static_cast<std::size_t>(n)], std::sin(g.x(n)), 1e-3);
}

TEST(TimeDerivatives, ExactOnLinearInTime) {
    Grid g = unit_grid(11, 20);
    SpaceTimeField f = sample(g, [](double x, double t) { return x + 3 * t; });
    SpaceTimeField three(g, 3.0);
    EXPECT_LT(max_abs_diff(dt_centered(g, f), three), 1e-10);
    EXPECT_LT(max_abs_diff(dt_backward(g, f), three), 1e-10);
    EXPECT_LT(max_abs_diff(dt_centered4(g, f, 10), three.level(10)), 1e-10);
    EXPECT_LT(max_abs_diff(dt_onesided4(g, f, 0, +1), three.level(0)), 1e-10);
    EXPECT_LT(max_abs_diff(dt_onesided4(g, f, 20, -1), three.level(20)), 1e-10);
}

TEST(Integration, AnchoredAtTheta) {
    Grid g = unit_grid(11, 40);
    SpaceTimeField f = sample(g, [](double x, double) { return x; });
    SpaceTimeField I = integrate_from(g, f, g.theta_index());
    SpaceTimeField expect = sample(g, [](double x, double t) { return x * (t - 0.5); });
    EXPECT_LT(max_abs_diff(I, expect), 1e-13);
}

TEST(Integration, RoundTripWithDerivative) {
    Grid g = unit_grid(11, 400);
    SpaceTimeField f = sample(g, [](double x, double t) { return std::sin(3 * t) * x; });
    SpaceTimeField I = integrate_from(g, dt_centered(g, f), 0);
    SpaceTimeField expect = sample(g, [](double x, double t) { return (std::sin(3 * t) - 0.0) * x; });
    EXPECT_LT(max_abs_diff(I, expect), 1e-4);
}

TEST(Window, RestrictCopiesLevels) {
    Grid g = unit_grid(11, 20);
    SpaceTimeField f = sample(g, [](double x, double t) { return x * t; });
    SpaceTimeField r = restrict_window(f, 5, 15);
    EXPECT_EQ(r.levels(), 11);
    EXPECT_EQ(r.level(0), f.level(5));
    EXPECT_EQ(r.level(10), f.level(15));
}

}  // namespace
}  // namespace pinv
