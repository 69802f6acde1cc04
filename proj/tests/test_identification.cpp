#include "support.hpp"

#include "pinv/errors.hpp"
#include "pinv/identification.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pinv {
namespace {

using test::constant_coefficients;
using test::sample;
using test::unit_grid;

SpatialField bump(const Grid& g, double amp, double k) {
    return sample(g, [=](double x) {
        if (x <= 0.2 || x >= 0.8) return 0.0;
        double y = (x - 0.2) / 0.6;
        return amp * std::pow(std::sin(M_PI * y), 2) * std::cos(k * M_PI * y);
    });
}

double rel_error(const Grid& g, const SpatialField& a, const SpatialField& b) {
    SpatialField d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return l2_norm_spatial(g, d) / l2_norm_spatial(g, b);
}

class Identification : public ::testing::Test {
protected:
    Grid g = unit_grid(101, 200);
    SubdomainMask omega1 = complement(g, box_mask(g, "inner", {0.15, 0.0}, {0.85, 0.0}), "omega1");
    CoefficientSet2x2 tilde = constant_coefficients(g, 0.5, 1.0, 1.0, 0.3, 0.2, 0.1, 0.1, 0.2);
};

TEST_F(Identification, ReferencesFollowWorkedExample) {
    auto refs = example_references(g);
    ASSERT_EQ(refs.size(), 4u);
    EXPECT_EQ(refs[0].first, SpatialField(static_cast<std::size_t>(g.nodes()), 1.0));
    EXPECT_EQ(refs[2].first, sample(g, [](double x) { return x; }));
    EXPECT_EQ(refs[3].second, sample(g, [](double x) { return x; }));
}

TEST_F(Identification, DeterminantPassesForWorkedExample) {
    DeterminantResult det = determinant_check(g, example_references(g), omega1);
    EXPECT_TRUE(det.pass);
    EXPECT_EQ(det.failing_nodes, 0);
    EXPECT_GT(det.min_abs, 0.0);
}

TEST_F(Identification, DeterminantFailsForDependentReferences) {
    auto refs = example_references(g);
    refs[2] = refs[0];
    DeterminantResult det = determinant_check(g, refs, omega1);
    EXPECT_FALSE(det.pass);
}

TEST_F(Identification, RecoversAllEightDifferences) {
    CoefficientDifferences planted = CoefficientDifferences::zero(g);
    planted.a = bump(g, 0.5, 0);
    planted.b = bump(g, 0.4, 1);
    planted.c = bump(g, -0.3, 2);
    planted.d = bump(g, 0.6, 1);
    planted.A[0] = bump(g, 0.3, 0);
    planted.B[0] = bump(g, -0.2, 1);
    planted.C[0] = bump(g, 0.25, 0);
    planted.D[0] = bump(g, 0.35, 2);
    auto experiments = simulate_experiments(g, tilde, planted.as_coefficients(g), example_references(g));
    IdentificationResult r = full_identification(g, experiments, omega1);
    EXPECT_TRUE(r.det.pass);
    EXPECT_LT(rel_error(g, r.diff.a, planted.a), 5e-2);
    EXPECT_LT(rel_error(g, r.diff.b, planted.b), 5e-2);
    EXPECT_LT(rel_error(g, r.diff.c, planted.c), 5e-2);
    EXPECT_LT(rel_error(g, r.diff.d, planted.d), 5e-2);
    EXPECT_LT(rel_error(g, r.diff.A[0], planted.A[0]), 5e-2);
    EXPECT_LT(rel_error(g, r.diff.B[0], planted.B[0]), 5e-2);
    EXPECT_LT(rel_error(g, r.diff.C[0], planted.C[0]), 5e-2);
    EXPECT_LT(rel_error(g, r.diff.D[0], planted.D[0]), 5e-2);
    for (int n = 0; n < g.nodes(); ++n)
        if (omega1.contains(n)) EXPECT_EQ(r.diff.a[static_cast<std::size_t>(n)], 0.0);
}

TEST_F(Identification, ZeroDifferencesGiveZero) {
    auto experiments = simulate_experiments(g, tilde, CoefficientDifferences::zero(g).as_coefficients(g),
                                            example_references(g));
    IdentificationResult r = full_identification(g, experiments, omega1);
    for (double v : r.diff.b) EXPECT_NEAR(v, 0.0, 1e-8);
}

TEST_F(Identification, TooFewExperiments) {
    auto experiments = simulate_experiments(g, tilde, CoefficientDifferences::zero(g).as_coefficients(g),
                                            example_references(g));
    experiments.pop_back();
    EXPECT_THROW(full_identification(g, experiments, omega1), RankDeficiencyError);
}

}  // namespace
}  // namespace pinv
