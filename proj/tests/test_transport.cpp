#include "support.hpp"

#include "pinv/carleman.hpp"
#include "pinv/errors.hpp"
#include "pinv/random_fields.hpp"
#include "pinv/transport.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pinv {
namespace {

using test::sample;
using test::unit_grid;

struct Region {
    Grid g = unit_grid(101, 20);
    SubdomainMask omega = box_mask(g, "omega", {0.0, 0.0}, {0.4, 0.0});
    SubdomainMask omega_prime = box_mask(g, "omega_prime", {0.05, 0.0}, {0.3, 0.0});
    VectorCoefficient p = VectorCoefficient::uniform(g, {1.0, 0.0});
};

TEST(Transport, ZeroRhsGivesZero) {
    Region s;
    SpaceTimeField u = solve_transport(s.g, s.p, CoefficientField{}, SpaceTimeField(s.g), s.omega);
    EXPECT_EQ(u.max_abs(), 0.0);
}

TEST(Transport, UnitRhsGivesDistanceFromInflow) {
    Region s;
    SpaceTimeField u = solve_transport(s.g, s.p, CoefficientField{}, SpaceTimeField(s.g, 1.0), s.omega);
    for (int k = 0; k < s.g.levels(); ++k)
        for (int n = 0; n < s.g.nodes(); ++n) {
            double expect = s.omega.contains(n) ? s.g.x(n) : 0.0;
            EXPECT_NEAR(u(k, n), expect, 1e-12);
        }
}

TEST(Transport, ResidualVanishes) {
    Region s;
    CoefficientField q = CoefficientField::constant(s.g, 0.5);
    SpaceTimeField f = sample(s.g, [](double x, double t) { return std::cos(3 * x + t) + x; });
    SpaceTimeField u = solve_transport(s.g, s.p, q, f, s.omega);
    EXPECT_LT(transport_residual(s.g, s.p, q, f, s.omega, u), 1e-12);
}

TEST(Transport, DegenerateNormalRejected) {
    Region s;
    VectorCoefficient zero = VectorCoefficient::uniform(s.g, {0.0, 0.0});
    EXPECT_THROW(solve_transport(s.g, zero, CoefficientField{}, SpaceTimeField(s.g, 1.0), s.omega), DegeneracyError);
}

TEST(Transport, EstimateRatioFiniteOverRandomRhs) {
    Region s;
    CoefficientField q = CoefficientField::constant(s.g, 0.5);
    double kappa = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        SpaceTimeField f = random_spacetime_field(s.g, rng, 4, 1.0);
        f += SpaceTimeField(s.g, rng.uniform(-1, 1));
        SpaceTimeField u = solve_transport(s.g, s.p, q, f, s.omega);
        kappa = std::max(kappa, transport_estimate_ratio(s.g, u, f, s.omega_prime));
    }
    EXPECT_TRUE(std::isfinite(kappa));
    EXPECT_GT(kappa, 0.0);
    EXPECT_LT(kappa, 1.0);
}

TEST(Lemma23, ZeroRhsGivesZeroSides) {
    Region s;
    SpaceTimeField z(s.g);
    Lemma23Result r = lemma23_weighted_estimate(s.g, z, z, s.p, CoefficientField{}, s.omega, s.omega_prime, 10.0);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
}

TEST(Lemma23, LinearSolutionFiniteAcrossS) {
    Region s;
    SpaceTimeField f(s.g, 1.0);
    SpaceTimeField u = solve_transport(s.g, s.p, CoefficientField{}, f, s.omega);
    for (double sv : {10.0, 20.0, 50.0}) {
        Lemma23Result r = lemma23_weighted_estimate(s.g, u, f, s.p, CoefficientField{}, s.omega, s.omega_prime, sv);
        EXPECT_GT(r.rhs, 0.0);
        EXPECT_TRUE(std::isfinite(r.kappa));
    }
}

}  // namespace
}  // namespace pinv
