#include "support.hpp"

#include "pinv/calculus.hpp"
#include "pinv/errors.hpp"
#include "pinv/forward.hpp"
#include "pinv/random_fields.hpp"
#include "pinv/transforms.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pinv {
namespace {

using test::constant_coefficients;
using test::max_abs_diff;
using test::sample;
using test::unit_grid;

TEST(Quotient, ZeroNumerators) {
    Grid g = unit_grid(21, 20);
    SpaceTimeField z(g), one(g, 1.0);
    auto [ut, vt] = quotient_fields(g, z, z, one, one, 1e-3);
    EXPECT_EQ(ut.max_abs(), 0.0);
    EXPECT_EQ(vt.max_abs(), 0.0);
}

TEST(Quotient, ConstantDenominator) {
    Grid g = unit_grid(21, 20);
    auto [ut, vt] = quotient_fields(g, SpaceTimeField(g, 1.0), SpaceTimeField(g), SpaceTimeField(g, 1.0),
                                    SpaceTimeField(g, 2.0), 1e-3);
    for (double v : ut.data()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Quotient, RoundTrip) {
    Grid g = unit_grid(31, 30);
    Rng rng(2);
    SpaceTimeField U = random_spacetime_field(g, rng, 3, 0.3) + SpaceTimeField(g, 1.0);
    SpaceTimeField V = random_spacetime_field(g, rng, 3, 0.3) + SpaceTimeField(g, 1.5);
    SpaceTimeField u = random_spacetime_field(g, rng, 3, 1.0), v = random_spacetime_field(g, rng, 3, 1.0);
    auto [ut, vt] = quotient_fields(g, u, v, U, V, 1e-3);
    for (std::size_t i = 0; i < u.data().size(); ++i) {
        EXPECT_NEAR(ut.data()[i] * V.data()[i], u.data()[i], 1e-14);
        EXPECT_NEAR(vt.data()[i] * U.data()[i], v.data()[i], 1e-14);
    }
}

TEST(Quotient, FloorViolationNamesNode) {
    Grid g = unit_grid(21, 20);
    SpaceTimeField V(g, 1.0);
    V(3, 7) = 1e-6;
    try {
        quotient_fields(g, V, V, SpaceTimeField(g, 1.0), V, 1e-3);
        FAIL() << "expected a degeneracy error";
    } catch (const DegeneracyError& e) {
        EXPECT_NE(std::string(e.what()).find("node 7"), std::string::npos);
    }
}

TEST(DerivedCoeffs, CollapseForUnitReferences) {
    Grid g = unit_grid(21, 20);
    CoefficientSet2x2 k = constant_coefficients(g, 0.5, 1.0, 0.8, -0.2);
    SpaceTimeField one(g, 1.0);
    DerivedCoeffs2x2 d = derive_coeffs_2x2(g, k, one, one, 1e-3);
    for (std::size_t i = 0; i < one.data().size(); ++i) {
        EXPECT_NEAR(d.a11.data()[i], 0.5, 1e-14);
        EXPECT_NEAR(d.a12.data()[i], 1.0, 1e-14);
        EXPECT_NEAR(d.a21.data()[i], 0.8, 1e-14);
        EXPECT_NEAR(d.a22.data()[i], -0.2, 1e-14);
        EXPECT_NEAR(d.W.data()[i], 1.0, 1e-14);
        EXPECT_NEAR(d.W1.data()[i], 0.0, 1e-14);
    }
}

TEST(DerivedCoeffs, ExponentialReferenceShiftsA22) {
    Grid g = unit_grid(21, 400);
    CoefficientSet2x2 k = constant_coefficients(g, 0.0, 0.0, 0.0, 0.0);
    SpaceTimeField U = sample(g, [](double, double t) { return std::exp(t); });
    DerivedCoeffs2x2 d = derive_coeffs_2x2(g, k, U, SpaceTimeField(g, 1.0), 1e-3);
    for (int kk = 1; kk < g.levels(); ++kk) EXPECT_NEAR(d.a22(kk, 10), -1.0, 2e-3);
    for (int kk = 1; kk < g.levels(); ++kk) EXPECT_NEAR(d.W1(kk, 10), 1.0, 2e-3);
}

TEST(DerivedCoeffs, DefinitionConsistency) {
    Grid g = unit_grid(31, 40);
    CoefficientSet2x2 k = constant_coefficients(g, 0.5, 1.0, 0.8, -0.2, 0.3, 0.1, 0.1, 0.2);
    SpaceTimeField U = sample(g, [](double x, double t) { return 1.5 + std::sin(x) + 0.2 * t; });
    SpaceTimeField V = sample(g, [](double x, double t) { return 2.0 + std::cos(2 * x) * (1 - 0.3 * t); });
    DerivedCoeffs2x2 d = derive_coeffs_2x2(g, k, U, V, 1e-3);
    for (std::size_t i = 0; i < U.data().size(); ++i) {
        const double W = U.data()[i] / V.data()[i];
        EXPECT_NEAR(d.W.data()[i], W, 1e-12);
        EXPECT_NEAR(d.A14[0].data()[i], 0.1 * W, 1e-12);
        EXPECT_NEAR(d.b1.data()[i], d.a12.data()[i] / W, 1e-12);
    }
}

double quotient_residual_at(int nx, int nt) {
    Grid g = unit_grid(nx, nt);
    CoefficientSet2x2 k = constant_coefficients(g, 0.5, 1.0, 0.8, -0.2, 0.3, 0.1, 0.1, 0.2);
    ProblemData ref = ProblemData::zero(g, 2);
    ref.initial = {sample(g, [](double x) { return 1 + 0.5 * std::sin(M_PI * x); }),
                   sample(g, [](double x) { return 1 + 0.3 * std::sin(M_PI * x); })};
    ref.boundary = {SpaceTimeField(g, 1.0), SpaceTimeField(g, 1.0)};
    auto [U, V] = solve_2x2(k, ref, g);

    SpatialField f = sample(g, [](double x) { return std::sin(M_PI * x); });
    SpatialField gg = sample(g, [](double x) { return 0.3 * std::cos(M_PI * x); });
    ProblemData diff = ProblemData::zero(g, 2);
    SpaceTimeField F(g), G(g);
    for (int kk = 0; kk < g.levels(); ++kk)
        for (int n = 0; n < g.nodes(); ++n) {
            F(kk, n) = f[static_cast<std::size_t>(n)] * V(kk, n);
            G(kk, n) = gg[static_cast<std::size_t>(n)] * U(kk, n);
        }
    diff.sources = {F, G};
    auto [u, v] = solve_2x2(k, diff, g);
    auto [ut, vt] = quotient_fields(g, u, v, U, V, 1e-3);
    DerivedCoeffs2x2 d = derive_coeffs_2x2(g, k, U, V, 1e-3);
    return std::max(quotient_residual_first(g, d, ut, vt, f), quotient_residual_second(g, d, ut, vt, gg));
}

TEST(DerivedCoeffs, QuotientResidualShrinksUnderRefinement) {
    const double coarse = quotient_residual_at(21, 100);
    const double fine = quotient_residual_at(41, 400);
    EXPECT_LT(fine, 1e-2);
    EXPECT_GT(coarse / fine, 3.0);
}

TEST(TimeDerivativePair, ZeroAndLinear) {
    Grid g = unit_grid(21, 200);
    SpaceTimeField z(g);
    auto [y0, z0] = time_derivative_pair(g, z, z);
    EXPECT_EQ(y0.max_abs(), 0.0);
    SpaceTimeField ut = sample(g, [](double x, double t) { return (t - 0.5) * std::sin(M_PI * x); });
    auto [y, zz] = time_derivative_pair(g, ut, z);
    SpaceTimeField phi = sample(g, [](double x, double) { return std::sin(M_PI * x); });
    EXPECT_LT(max_abs_diff(y, phi), 1e-12);
}

TEST(TimeDerivativePair, RoundTripIsSecondOrder) {
    auto err = [](int nt) {
        Grid g = unit_grid(11, nt);
        SpaceTimeField ut = sample(g, [](double x, double t) { return std::sin(4 * (t - 0.5)) * x; });
        auto [y, z] = time_derivative_pair(g, ut, SpaceTimeField(g));
        return max_abs_diff(integrate_from(g, y, g.theta_index()), ut);
    };
    const double e1 = err(100), e2 = err(200);
    EXPECT_LT(e2, 1e-3);
    EXPECT_GT(e1 / e2, 3.5);
}

TEST(TimeDerivativePair, RejectsNonzeroSnapshot) {
    Grid g = unit_grid(21, 20);
    SpaceTimeField ut(g, 0.0);
    ut(g.theta_index(), 4) = 1e-6;
    EXPECT_THROW(time_derivative_pair(g, ut, SpaceTimeField(g)), PreconditionError);
}

TEST(WTransform, Examples) {
    Grid g = unit_grid(11, 100);
    SpaceTimeField z(g), one(g, 1.0);
    EXPECT_EQ(w_transform(g, z, one).max_abs(), 0.0);
    Rng rng(3);
    SpaceTimeField r = random_spacetime_field(g, rng, 3, 1.0);
    EXPECT_EQ(w_transform(g, r, z).data(), r.data());
    SpaceTimeField w = w_transform(g, one, one);
    EXPECT_LT(max_abs_diff(w, sample(g, [](double, double t) { return 1 + (t - 0.5); })), 1e-12);
    for (int n = 0; n < g.nodes(); ++n) EXPECT_EQ(w(g.theta_index(), n), 1.0);
}

TEST(Reduce3x3, CollapsesForConstantCoupling) {
    Grid g = unit_grid(21, 20);
    CoefficientSet3x3 k;
    k.a[0][2] = CoefficientField::constant(g, 1.0);
    k.a[1][1] = CoefficientField::constant(g, 0.4);
    k.a[1][2] = CoefficientField::constant(g, 0.7);
    k.a[2][0] = CoefficientField::constant(g, -0.3);
    SpaceTimeField h(g, 2.5);
    Reduced3x3Coeffs r = reduce_3x3(g, k, SpaceTimeField(g), h);
    Rng rng(1);
    SpaceTimeField v = random_spacetime_field(g, rng, 2, 1.0), w = random_spacetime_field(g, rng, 2, 1.0);
    EXPECT_EQ(reduced_z(g, k, v, w).data(), w.data());
    for (std::size_t i = 0; i < h.data().size(); ++i) {
        EXPECT_EQ(r.A[0].data()[i], 0.0);
        EXPECT_EQ(r.B[0].data()[i], 0.0);
        EXPECT_DOUBLE_EQ(r.G.data()[i], 2.5);
        EXPECT_DOUBLE_EQ(r.c.data()[i], 0.7);
        EXPECT_DOUBLE_EQ(r.d.data()[i], 0.4);
        EXPECT_DOUBLE_EQ(r.e.data()[i], -0.3);
    }
}

TEST(Reduce3x3, ConvectionFromVaryingA13) {
    Grid g = unit_grid(101, 20);
    CoefficientSet3x3 k;
    k.a[0][1] = CoefficientField::from_function(g, [](double x, double) { return x; });
    k.a[0][2] = CoefficientField::from_function(g, [](double x, double) { return 1 + x / 2; });
    Reduced3x3Coeffs r = reduce_3x3(g, k, SpaceTimeField(g), SpaceTimeField(g));
    for (int n = 0; n < g.nodes(); ++n) EXPECT_NEAR(r.A[0](0, n), -1.0 / (1 + g.x(n) / 2), 1e-12);
}

TEST(Reduce3x3, A13FloorViolation) {
    Grid g = unit_grid(21, 20);
    CoefficientSet3x3 k;
    k.a[0][2] = CoefficientField::from_function(g, [](double x, double) { return x - 0.5; });
    EXPECT_THROW(reduce_3x3(g, k, SpaceTimeField(g), SpaceTimeField(g), 1e-3), DegeneracyError);
}

double reduced_residual_at(int nx, int nt) {
    Grid g = unit_grid(nx, nt);
    CoefficientSet3x3 k;
    const double m[3][3] = {{0.2, 0.0, 0.0}, {0.5, -0.1, 0.3}, {0.4, 0.6, 0.1}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k.a[i][j] = CoefficientField::constant(g, m[i][j]);
    k.a[0][1] = CoefficientField::from_function(g, [](double x, double) { return 0.5 + x; });
    k.a[0][2] = CoefficientField::from_function(g, [](double x, double) { return 1 + 0.5 * std::sin(x); });
    ProblemData data = ProblemData::zero(g, 3);
    data.initial[0] = sample(g, [](double x) { return std::sin(M_PI * x); });
    data.sources = {SpaceTimeField(g), sample(g, [](double x, double t) { return x * (1 - x) * (1 + t); }),
                    sample(g, [](double x, double) { return std::sin(2 * M_PI * x); })};
    auto X = solve_3x3(k, data, g);
    Reduced3x3Coeffs r = reduce_3x3(g, k, data.sources[1], data.sources[2]);
    return reduced_residual(g, k, r, X[0], X[1], X[2], data.sources[0], data.sources[1]);
}

TEST(Reduce3x3, ResidualShrinksUnderRefinement) {
    const double coarse = reduced_residual_at(21, 100);
    const double fine = reduced_residual_at(41, 400);
    EXPECT_LT(fine, 1e-2);
    EXPECT_GT(coarse / fine, 3.0);
}

TEST(NormalCheck, Examples) {
    Grid g = unit_grid(21, 10);
    EXPECT_THROW(check_assumption_normal(g, VectorCoefficient::uniform(g, {1.0, 0.0}), {}, 1e-8), PreconditionError);
    NormalCheck one = check_assumption_normal(g, VectorCoefficient::uniform(g, {1.0, 0.0}), {g.nodes() - 1}, 1e-8);
    EXPECT_TRUE(one.ok);
    EXPECT_DOUBLE_EQ(one.margin, 1.0);

    Grid g2 = Grid::make_2d({0.0, 0.0}, {1.0, 1.0}, {11, 11}, 1.0, 10, 0.5);
    std::vector<int> top;
    for (int i = 1; i < 10; ++i) top.push_back(g2.index(i, 10));
    NormalCheck tangent = check_assumption_normal(g2, VectorCoefficient::uniform(g2, {1.0, 0.0}), top, 1e-8);
    EXPECT_FALSE(tangent.ok);
    EXPECT_DOUBLE_EQ(tangent.margin, 0.0);

    CoefficientSet3x3 k;
    k.a[0][1] = CoefficientField::from_function(g, [](double x, double) { return x; });
    k.a[0][2] = CoefficientField::constant(g, 1.0);
    NormalCheck c = check_assumption_normal(g, normal_condition_field_3x3(g, k), {g.nodes() - 1}, 1e-8);
    EXPECT_TRUE(c.ok);
    EXPECT_NEAR(c.margin, 1.0, 1e-12);

    k.a[0][1] = CoefficientField::constant(g, 2.0);
    EXPECT_FALSE(check_assumption_normal(g, normal_condition_field_3x3(g, k), {g.nodes() - 1}, 1e-8).ok);
}

}  // namespace
}  // namespace pinv
