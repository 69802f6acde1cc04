#include "support.hpp"

#include "pinv/carleman.hpp"
#include "pinv/errors.hpp"
#include "pinv/forward.hpp"
#include "pinv/random_fields.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace pinv {
namespace {

using test::constant_coefficients;
using test::sample;
using test::unit_grid;

struct Solved {
    CoefficientSet2x2 k;
    SpaceTimeField u, v, f, g;
};

Solved solved_instance(const Grid& grid, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Solved s;
    s.k = constant_coefficients(grid, rng.uniform(-1, 1), rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5),
                                rng.uniform(-1, 1), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    ProblemData data = ProblemData::zero(grid, 2);
    s.f = scale * random_spacetime_field(grid, rng, 3, 1.0);
    s.g = scale * random_spacetime_field(grid, rng, 3, 1.0);
    SpatialField u0 = random_sine_field(grid, rng, 3, 1.0), v0 = random_sine_field(grid, rng, 3, 1.0);
    for (auto* f0 : {&u0, &v0})
        for (double& x : *f0) x *= scale;
    data.initial = {u0, v0};
    data.sources = {s.f, s.g};
    std::tie(s.u, s.v) = solve_2x2(s.k, data, grid);
    return s;
}

TEST(Weight, AlphaPositiveAndRhoAtMidpoint) {
    Grid g = unit_grid(101, 100);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.7, 0.0});
    WeightSpec w = build_weight(g, omega);
    EXPECT_GT(w.alpha_min(), 0.0);
    w.T = 2.0;
    EXPECT_DOUBLE_EQ(w.rho(1.0), 4.0 / 4.0);
    w.T = 1.0;
    EXPECT_DOUBLE_EQ(w.rho(0.5), 4.0);
}

TEST(Weight, PsiVanishesOnBoundaryAndPeaksInside) {
    Grid g = unit_grid(101, 100);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.7, 0.0});
    WeightSpec w = build_weight(g, omega);
    EXPECT_NEAR(w.psi.front(), 0.0, 1e-14);
    EXPECT_NEAR(w.psi.back(), 0.0, 1e-14);
    auto peak = std::max_element(w.psi.begin(), w.psi.end()) - w.psi.begin();
    EXPECT_TRUE(omega.contains(static_cast<int>(peak)));
    EXPECT_TRUE(w.warnings.empty());
}

TEST(Weight, WarnsAboutCriticalPointOutsideOmega) {
    Grid g = unit_grid(101, 100);
    SubdomainMask omega = box_mask(g, "omega", {0.6, 0.0}, {0.8, 0.0});
    SpatialField psi = sample(g, [](double x) { return x * (1 - x); });
    WeightSpec w = weight_from_psi(g, psi, omega, 2.0);
    EXPECT_FALSE(w.warnings.empty());
}

TEST(Weight, UnderflowsNextToTimeEndpoints) {
    Grid g = unit_grid(101, 1000);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.7, 0.0});
    WeightSpec w = build_weight(g, omega);
    w.s = 1.0;
    for (int n = 0; n < g.nodes(); n += 10) {
        EXPECT_LT(w.log_weight(n, g.time(1)), std::log(1e-300));
        EXPECT_LT(w.log_weight(n, g.time(g.nt() - 1)), std::log(1e-300));
        EXPECT_LT(w.log_weight(n, g.time(100)), w.log_weight(n, g.time(200)));
    }
    EXPECT_EQ(w.log_weight(0, 0.0), -HUGE_VAL);
}

TEST(LogSum, MatchesDirectSumAndAvoidsUnderflow) {
    LogSum s;
    s.add(std::log(2.0));
    s.add(std::log(3.0), 4.0);
    EXPECT_NEAR(s.value(), 14.0, 1e-12);
    LogSum tiny;
    tiny.add(-2000.0);
    tiny.add(-2000.0);
    EXPECT_NEAR(tiny.log(), -2000.0 + std::log(2.0), 1e-12);
}

TEST(Sides2x2, ZeroSolutionGivesZeros) {
    Grid g = unit_grid(31, 60);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    SpaceTimeField z(g);
    CarlemanSides s = carleman_sides_2x2(g, CoefficientSet2x2{}, z, z, z, z, build_weight(g, omega), omega);
    EXPECT_EQ(s.lhs, 0.0);
    EXPECT_EQ(s.rhs_obs, 0.0);
    EXPECT_EQ(s.rhs_src, 0.0);
    EXPECT_TRUE(s.degenerate());
}

TEST(Sides2x2, RejectsNonSolution) {
    Grid g = unit_grid(31, 60);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    Solved s = solved_instance(g, 4);
    s.u(10, 10) += 0.1;
    EXPECT_THROW(carleman_sides_2x2(g, s.k, s.u, s.v, s.f, s.g, build_weight(g, omega), omega), NotASolutionError);
}

TEST(Sides2x2, QuadraticHomogeneity) {
    Grid g = unit_grid(31, 100);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    WeightSpec w = build_weight(g, omega);
    w.s = 2.0;
    Solved one = solved_instance(g, 7, 1.0), two = solved_instance(g, 7, 2.0);
    CarlemanSides a = carleman_sides_2x2(g, one.k, one.u, one.v, one.f, one.g, w, omega);
    CarlemanSides b = carleman_sides_2x2(g, two.k, two.u, two.v, two.f, two.g, w, omega);
    EXPECT_NEAR(b.log_lhs - a.log_lhs, std::log(4.0), 1e-9);
    EXPECT_NEAR(b.log_rhs_obs - a.log_rhs_obs, std::log(4.0), 1e-9);
    EXPECT_NEAR(b.log_rhs_src - a.log_rhs_src, std::log(4.0), 1e-9);
}

TEST(Sides2x2, EndpointSlabsNegligible) {
    Grid g = unit_grid(31, 200);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    WeightSpec w = build_weight(g, omega);
    w.s = 10.0;
    ProblemData data = ProblemData::zero(g, 2);
    data.initial[0] = sample(g, [](double x) { return std::sin(M_PI * x); });
    auto [U, V] = solve_2x2(CoefficientSet2x2{}, data, g);
    SpaceTimeField z(g);
    CarlemanSides s = carleman_sides_2x2(g, CoefficientSet2x2{}, U, V, z, z, w, omega);
    ASSERT_TRUE(std::isfinite(s.log_lhs));
    const auto& lv = s.log_lhs_by_level;
    ASSERT_EQ(static_cast<int>(lv.size()), g.levels());
    const int slab = g.nt() / 20;
    LogSum ends;
    for (int k = 0; k < g.levels(); ++k)
        if (k <= slab || k >= g.nt() - slab) ends.add(lv[static_cast<std::size_t>(k)]);
    EXPECT_LT(ends.log() - s.log_lhs, std::log(1e-12));
}

TEST(Audit, ZeroInstanceIsDegenerate) {
    std::vector<double> s_grid{1, 2, 5};
    std::vector<std::vector<CarlemanSides>> sides(3, std::vector<CarlemanSides>(1));
    AuditTable t = audit_ratios(s_grid, sides);
    for (const auto& row : t.rows) {
        EXPECT_EQ(row.valid, 0);
        EXPECT_EQ(row.degenerate, 1);
    }
}

TEST(Audit, RandomInstancesFiniteAndEventuallyNonincreasing) {
    Grid g = unit_grid(41, 200);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    std::vector<Instance2x2> inst;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Solved s = solved_instance(g, seed);
        inst.push_back({s.k, s.u, s.v, s.f, s.g});
    }
    AuditTable t = audit_carleman_2x2(g, inst, build_weight(g, omega), omega, {1, 2, 5, 10, 20, 50});
    EXPECT_TRUE(t.finite);
    EXPECT_TRUE(t.nonincreasing);
    EXPECT_TRUE(t.pass);
    ASSERT_TRUE(t.s0_index.has_value());
    for (std::size_t i = *t.s0_index + 1; i < t.rows.size(); ++i)
        EXPECT_LE(t.rows[i].log10_max_ratio, t.rows[i - 1].log10_max_ratio);
}

TEST(Audit, InvariantUnderInstanceRelabeling) {
    Grid g = unit_grid(31, 100);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    std::vector<Instance2x2> inst;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        Solved s = solved_instance(g, seed);
        inst.push_back({s.k, s.u, s.v, s.f, s.g});
    }
    std::vector<double> s_grid{1, 5, 20};
    AuditTable a = audit_carleman_2x2(g, inst, build_weight(g, omega), omega, s_grid);
    std::reverse(inst.begin(), inst.end());
    AuditTable b = audit_carleman_2x2(g, inst, build_weight(g, omega), omega, s_grid);
    for (std::size_t i = 0; i < s_grid.size(); ++i) EXPECT_EQ(a.rows[i].log10_max_ratio, b.rows[i].log10_max_ratio);
}

TEST(Audit, LargerObservationRegionLowersRatios) {
    Grid g = unit_grid(31, 100);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    SubdomainMask whole = whole_domain(g);
    std::vector<Instance2x2> inst;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Solved s = solved_instance(g, seed);
        inst.push_back({s.k, s.u, s.v, s.f, s.g});
    }
    std::vector<double> s_grid{1, 2, 5, 10};
    WeightSpec w = build_weight(g, omega);
    AuditTable small = audit_carleman_2x2(g, inst, w, omega, s_grid);
    AuditTable large = audit_carleman_2x2(g, inst, w, whole, s_grid);
    for (std::size_t i = 0; i < s_grid.size(); ++i)
        EXPECT_LE(large.rows[i].log10_max_ratio, small.rows[i].log10_max_ratio + 1e-12);
}

TEST(Sides3x3, ZeroAndHomogeneity) {
    Grid g = unit_grid(31, 100);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    WeightSpec w = build_weight(g, omega);
    w.s = 2.0;
    CoefficientSet3x3 k;
    k.a[0][1] = CoefficientField::from_function(g, [](double x, double) { return 0.5 + x; });
    k.a[0][2] = CoefficientField::constant(g, 1.0);
    k.a[1][1] = CoefficientField::constant(g, -0.5);
    k.a[2][0] = CoefficientField::constant(g, 0.3);
    SpaceTimeField z(g);
    CarlemanSides zero = carleman_sides_3x3(g, k, z, z, z, z, z, z, w, omega);
    EXPECT_EQ(zero.lhs, 0.0);
    EXPECT_EQ(zero.rhs_obs, 0.0);
    EXPECT_EQ(zero.rhs_src, 0.0);

    Rng rng(9);
    ProblemData data = ProblemData::zero(g, 3);
    data.sources = {random_spacetime_field(g, rng, 3, 1.0), random_spacetime_field(g, rng, 3, 1.0),
                    random_spacetime_field(g, rng, 3, 1.0)};
    auto X = solve_3x3(k, data, g);
    CarlemanSides a = carleman_sides_3x3(g, k, X[0], X[1], X[2], data.sources[0], data.sources[1], data.sources[2], w, omega);
    for (auto& f : data.sources) f *= 2.0;
    auto Y = solve_3x3(k, data, g);
    CarlemanSides b = carleman_sides_3x3(g, k, Y[0], Y[1], Y[2], data.sources[0], data.sources[1], data.sources[2], w, omega);
    EXPECT_TRUE(std::isfinite(a.log_lhs));
    EXPECT_NEAR(b.log_lhs - a.log_lhs, std::log(4.0), 1e-9);
    EXPECT_NEAR(b.log_rhs_obs - a.log_rhs_obs, std::log(4.0), 1e-9);
    EXPECT_NEAR(b.log_rhs_src - a.log_rhs_src, std::log(4.0), 1e-9);
}

TEST(Lemma31, ZeroSeries) {
    InequalitySides r = lemma31_check(std::vector<double>(101, 0.0), 1.0, 1.0);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
}

TEST(Lemma31, ConstantSeriesMatchesClosedForm) {
    // With g = 1, T = 2, s = 1 both sides reduce to Gaussian integrals over r = t - 1 in [-1, 1].
    InequalitySides r = lemma31_check(std::vector<double>(20001, 1.0), 2.0, 1.0);
    const double I = std::sqrt(M_PI / 2.0) * std::erf(std::sqrt(2.0));
    EXPECT_NEAR(r.lhs, I / 4.0 - std::exp(-2.0) / 2.0, 1e-7);
    EXPECT_NEAR(r.rhs, I / 4.0, 1e-7);
    EXPECT_LE(r.lhs, r.rhs);
}

TEST(Lemma31, HoldsOnRandomSeries) {
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        std::vector<double> g = random_time_series(rng, 2001, 1.0, 6, 1.0);
        for (double s : {1.0, 10.0, 100.0}) {
            InequalitySides r = lemma31_check(g, 1.0, s);
            if (!(r.lhs <= r.rhs * (1.0 + 1e-3))) ++failures;
        }
    }
    EXPECT_EQ(failures, 0);
}

TEST(Lemma31, CorruptedExponentBreaksInequality) {
    int failures = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        std::vector<double> g = random_time_series(rng, 2001, 1.0, 6, 1.0);
        InequalitySides r = lemma31_check(g, 1.0, 100.0, 1.0, +1.0);
        if (!(r.lhs <= r.rhs * (1.0 + 1e-3))) ++failures;
    }
    EXPECT_GT(failures, 0);
}

TEST(Lemma31, RejectsEvenSampleCount) {
    EXPECT_THROW(lemma31_check(std::vector<double>(100, 1.0), 1.0, 1.0), ConfigError);
}

class Lemma32 : public ::testing::Test {
protected:
    Grid g = unit_grid(31, 2000);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    WeightSpec w = build_weight(g, omega);
};

TEST_F(Lemma32, ZeroField) {
    Lemma32Result r = lemma32_check(g, SpaceTimeField(g), w, 1.0, 0.05);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
}

TEST_F(Lemma32, ConstantFieldKappaBoundedAcrossS) {
    double lo = HUGE_VAL, hi = 0.0;
    for (double s : {1.0, 10.0, 100.0}) {
        Lemma32Result r = lemma32_check(g, SpaceTimeField(g, 1.0), w, s, 0.05);
        ASSERT_TRUE(std::isfinite(r.kappa17));
        lo = std::min(lo, r.kappa17);
        hi = std::max(hi, r.kappa17);
    }
    EXPECT_LT(hi / lo, 2.0);
}

TEST_F(Lemma32, RatioShrinksAsMassMovesTowardEndpoints) {
    auto bump = [&](double center) {
        return sample(g, [=](double, double t) { return std::exp(-std::pow((t - center) / 0.03, 2)); });
    };
    for (double s : {1.0, 10.0, 100.0}) {
        double prev = HUGE_VAL;
        for (double center : {0.5, 0.3, 0.15}) {
            Lemma32Result r = lemma32_check(g, bump(center), w, s, 0.05);
            EXPECT_LT(r.kappa17, prev);
            prev = r.kappa17;
        }
    }
}

}  // namespace
}  // namespace pinv
