#include "support.hpp"

#include "pinv/errors.hpp"
#include "pinv/forward.hpp"
#include "pinv/inverse.hpp"
#include "pinv/random_fields.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pinv {
namespace {

using test::constant_coefficients;
using test::sample;
using test::unit_grid;

ProblemData positive_reference(const Grid& g) {
    ProblemData ref = ProblemData::zero(g, 2);
    ref.initial = {sample(g, [](double x) { return 1 + 0.5 * std::sin(M_PI * x); }),
                   sample(g, [](double x) { return 1 + 0.3 * std::sin(M_PI * x); })};
    ref.boundary = {SpaceTimeField(g, 1.0), SpaceTimeField(g, 1.0)};
    return ref;
}

double rel_error(const Grid& g, const SpatialField& a, const SpatialField& b) {
    SpatialField d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return l2_norm_spatial(g, d) / l2_norm_spatial(g, b);
}

TEST(Snapshot, ZeroRatesGiveZeroCoefficients) {
    Grid g = unit_grid(21, 20);
    SpatialField z(static_cast<std::size_t>(g.nodes()), 0.0), one(z.size(), 1.0);
    auto [f, h] = snapshot_reconstruct(g, z, z, one, one, 1e-3);
    for (std::size_t i = 0; i < z.size(); ++i) {
        EXPECT_EQ(f[i], 0.0);
        EXPECT_EQ(h[i], 0.0);
    }
}

TEST(Snapshot, RejectsSmallSnapshot) {
    Grid g = unit_grid(21, 20);
    SpatialField z(static_cast<std::size_t>(g.nodes()), 0.0), one(z.size(), 1.0);
    EXPECT_THROW(snapshot_reconstruct(g, one, one, one, z, 1e-3), DegeneracyError);
}

TEST(Snapshot, RecoversPlantedDifferences) {
    Grid g = unit_grid(101, 500);
    CoefficientSet2x2 tilde = constant_coefficients(g, 0.5, 1.0, 0.8, -0.2);
    ProblemData ref = positive_reference(g);
    auto [Ut, Vt] = solve_2x2(tilde, ref, g);
    SpatialField f = sample(g, [](double x) { return std::sin(M_PI * x); });
    SpatialField h = sample(g, [](double x) { return 0.3 * std::cos(M_PI * x); });
    CoefficientSet2x2 truth = tilde;
    truth.b = tilde.b.plus(CoefficientField::spatial(f), g);
    truth.c = tilde.c.plus(CoefficientField::spatial(h), g);
    FieldSet sources{SpaceTimeField(g), SpaceTimeField(g)};
    for (int k = 0; k <= g.nt(); ++k)
        for (int n = 0; n < g.nodes(); ++n) {
            sources[0](k, n) = f[static_cast<std::size_t>(n)] * Vt(k, n);
            sources[1](k, n) = h[static_cast<std::size_t>(n)] * Ut(k, n);
        }
    auto rate = matched_difference_rate(g, SystemOperator::from(truth), sources);
    const int kt = g.theta_index();
    auto [fh, hh] = snapshot_reconstruct(g, rate[0], rate[1], Ut.level(kt), Vt.level(kt), 1e-3);
    EXPECT_LT(rel_error(g, fh, f), 1e-2);
    EXPECT_LT(rel_error(g, hh, h), 1e-2);
}

TEST(Extrapolation, ExactForQuadratics) {
    Grid g = unit_grid(21, 10);
    SpatialField f = sample(g, [](double x) { return 2 * x * x - x + 0.5; });
    SpatialField damaged = f;
    damaged.front() = 99.0;
    damaged.back() = -99.0;
    extrapolate_to_boundary(g, damaged);
    EXPECT_NEAR(damaged.front(), f.front(), 1e-12);
    EXPECT_NEAR(damaged.back(), f.back(), 1e-12);
}

class Variational : public ::testing::Test {
protected:
    Grid g = unit_grid(41, 160);
    VariationalProblem problem{g,
                               constant_coefficients(g, 0.5, 0.0, 0.0, -0.2),
                               positive_reference(g),
                               box_mask(g, "omega", {0.2, 0.0}, {0.5, 0.0}),
                               SpatialField(static_cast<std::size_t>(g.nodes()), 1.0),
                               SpatialField(static_cast<std::size_t>(g.nodes()), 0.8)};
    SpatialField planted = sample(g, [](double x) { return 0.5 * std::sin(2 * M_PI * x); });

    SpatialField b_true() const {
        SpatialField b = problem.b_prior;
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += planted[i];
        return b;
    }
};

TEST_F(Variational, GradientMatchesFiniteDifferences) {
    Observation obs = make_observation(problem, b_true(), problem.c_prior, 0.0, 1);
    VariationalObjective J(problem, obs, 1e-6);
    Rng rng(4);
    SpatialField b0 = problem.b_prior, c0 = problem.c_prior;
    for (auto& b : b0) b += 0.1 * rng.uniform(-1, 1);
    SpatialField gb, gc;
    J.evaluate(b0, c0, &gb, &gc);
    const double h = 1e-5;
    for (int d = 0; d < 10; ++d) {
        SpatialField bp = b0, bm = b0, cp = c0, cm = c0;
        double analytic = 0.0;
        for (std::size_t i = 0; i < b0.size(); ++i) {
            const double db = rng.uniform(-1, 1), dc = rng.uniform(-1, 1);
            analytic += gb[i] * db + gc[i] * dc;
            bp[i] += h * db;
            bm[i] -= h * db;
            cp[i] += h * dc;
            cm[i] -= h * dc;
        }
        const double fd = (J.evaluate(bp, cp) - J.evaluate(bm, cm)) / (2 * h);
        EXPECT_LT(std::abs(fd - analytic), 1e-4 * std::abs(fd));
    }
}

TEST_F(Variational, ObjectiveVanishesAtTruthWithoutNoise) {
    Observation obs = make_observation(problem, b_true(), problem.c_prior, 0.0, 1);
    VariationalObjective J(problem, obs, 0.0);
    EXPECT_LT(J.evaluate(b_true(), problem.c_prior), 1e-24);
    EXPECT_GT(J.evaluate(problem.b_prior, problem.c_prior), 1e-8);
}

TEST_F(Variational, NoiseIsSeeded) {
    Observation a = make_observation(problem, b_true(), problem.c_prior, 0.01, 9);
    Observation b = make_observation(problem, b_true(), problem.c_prior, 0.01, 9);
    Observation c = make_observation(problem, b_true(), problem.c_prior, 0.01, 10);
    EXPECT_EQ(a.u_on_omega.data(), b.u_on_omega.data());
    EXPECT_NE(a.u_on_omega.data(), c.u_on_omega.data());
}

TEST_F(Variational, RecoversPlantedPerturbationWithoutNoise) {
    Observation obs = make_observation(problem, b_true(), problem.c_prior, 0.0, 1);
    VariationalOptions opt;
    opt.max_iter = 500;
    ReconstructionResult r = variational_reconstruct(problem, obs, opt);
    EXPECT_LT(rel_error(g, r.f_hat, planted), 5e-2);
    for (std::size_t i = 1; i < r.misfit_history.size(); ++i)
        EXPECT_LE(r.misfit_history[i], r.misfit_history[i - 1] * (1 + 1e-12));
}

class Stability : public ::testing::Test {
protected:
    Grid g = unit_grid(51, 200);
    SubdomainMask omega = box_mask(g, "omega", {0.2, 0.0}, {0.5, 0.0});
    CoefficientSet2x2 tilde = constant_coefficients(g, 0.5, 1.0, 0.8, -0.2);
    ProblemData ref = positive_reference(g);

    StabilityPair pair(double scale) const {
        return {tilde, sample(g, [=](double x) { return scale * std::cos(M_PI * x); }),
                sample(g, [=](double x) { return scale * 0.5 * std::sin(2 * M_PI * x); })};
    }
};

TEST_F(Stability, ZeroPerturbationIsDegenerate) {
    StabilityRow r = stability_ratio(g, ref, pair(0.0), omega);
    EXPECT_TRUE(r.degenerate || r.excluded);
}

TEST_F(Stability, RatioIsScaleInvariant) {
    StabilityRow a = stability_ratio(g, ref, pair(1e-2), omega);
    StabilityRow b = stability_ratio(g, ref, pair(1e-3), omega);
    ASSERT_FALSE(a.excluded);
    EXPECT_TRUE(std::isfinite(a.ratio));
    EXPECT_GT(a.ratio, 0.0);
    EXPECT_NEAR(a.ratio, b.ratio, 0.05 * a.ratio);
}

TEST_F(Stability, SweepKappaIsMaxOverRows) {
    std::vector<StabilityPair> pairs{pair(1e-2), pair(2e-2)};
    pairs[1].g = sample(g, [](double x) { return 0.02 * x; });
    StabilityResult r = stability_sweep(g, ref, pairs, omega);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(r.kappa_hat, std::max(r.rows[0].ratio, r.rows[1].ratio));
}

TEST_F(Stability, BoundViolationIsExcluded) {
    StabilityOptions opt;
    opt.bound_M = 0.5;
    StabilityRow r = stability_ratio(g, ref, pair(1e-2), omega, opt);
    EXPECT_TRUE(r.excluded);
    EXPECT_FALSE(r.reason.empty());
}

}  // namespace
}  // namespace pinv
