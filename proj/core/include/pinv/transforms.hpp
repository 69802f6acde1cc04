#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/geometry.hpp"

#include <array>
#include <utility>

namespace pinv {

using VectorField = std::array<SpaceTimeField, 2>;

/// Coefficients of the quotient system for (u / V~, v / U~), plus the auxiliary fields
/// W = U~ / V~, W1 = dW/dt / W, b1 = a12 / W and b2 = (da12/dt) / W.
struct DerivedCoeffs2x2 {
    SpaceTimeField a11, a12, a21, a22;
    VectorField A13, A14, A23, A24;
    SpaceTimeField W, W1, b1, b2;
};

/// Coefficients of the system for (u, z, v) with z = a12 v + a13 w.
struct Reduced3x3Coeffs {
    VectorField A, B;
    SpaceTimeField a, b, c, d, e, G;
};

struct NormalCheck {
    bool ok = false;
    double margin = 0.0;
};

/// Pointwise quotients u / V~ and v / U~. Throws DegeneracyError at the first node below the floor.
std::pair<SpaceTimeField, SpaceTimeField> quotient_fields(const Grid& grid, const SpaceTimeField& u,
                                                          const SpaceTimeField& v, const SpaceTimeField& Utilde,
                                                          const SpaceTimeField& Vtilde, double delta0);

/// Default positivity floor 1e-3 * max |U~|.
double default_delta0(const SpaceTimeField& Utilde);

DerivedCoeffs2x2 derive_coeffs_2x2(const Grid& grid, const CoefficientSet2x2& coeffs, const SpaceTimeField& Utilde,
                                   const SpaceTimeField& Vtilde, double delta0);

/// Largest defect of the first quotient equation at interior nodes, with the solver's stencils.
double quotient_residual_first(const Grid& grid, const DerivedCoeffs2x2& dc, const SpaceTimeField& ut,
                               const SpaceTimeField& vt, const SpatialField& f);
/// Largest defect of the second quotient equation.
double quotient_residual_second(const Grid& grid, const DerivedCoeffs2x2& dc, const SpaceTimeField& ut,
                                const SpaceTimeField& vt, const SpatialField& g);

/// y = d(u~)/dt and z = d(v~)/dt. Requires u~ and v~ to vanish at theta.
std::pair<SpaceTimeField, SpaceTimeField> time_derivative_pair(const Grid& grid, const SpaceTimeField& ut,
                                                               const SpaceTimeField& vt, double tol = 1e-10);

/// w = z + W1 * int_theta^t z.
SpaceTimeField w_transform(const Grid& grid, const SpaceTimeField& z, const SpaceTimeField& W1);

/// z = a12 v + a13 w.
SpaceTimeField reduced_z(const Grid& grid, const CoefficientSet3x3& coeffs, const SpaceTimeField& v,
                         const SpaceTimeField& w);

/// Throws DegeneracyError when |a13| < tol13 somewhere.
void check_a13_floor(const Grid& grid, const CoefficientSet3x3& coeffs, double tol13);

Reduced3x3Coeffs reduce_3x3(const Grid& grid, const CoefficientSet3x3& coeffs, const SpaceTimeField& g,
                            const SpaceTimeField& h, double tol13 = 1e-8);

/// Largest defect over the three equations of the reduced (u, z, v) system at interior nodes.
double reduced_residual(const Grid& grid, const CoefficientSet3x3& coeffs, const Reduced3x3Coeffs& rc,
                        const SpaceTimeField& u, const SpaceTimeField& v, const SpaceTimeField& w,
                        const SpaceTimeField& f, const SpaceTimeField& g);

/// grad a12 - (a12 / a13) grad a13, the field whose normal component must not vanish on gamma.
VectorCoefficient normal_condition_field_3x3(const Grid& grid, const CoefficientSet3x3& coeffs);

/// min over gamma nodes (and time levels) of |field . nu| compared against tol_nu.
NormalCheck check_assumption_normal(const Grid& grid, const VectorCoefficient& field, const std::vector<int>& gamma,
                                    double tol_nu);

}  // namespace pinv
