#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/geometry.hpp"

namespace pinv {

struct TransportOptions {
    /// Smallest admissible |p . nu| on gamma; negative selects 1e-8 * sup|p|.
    double tol_nu = -1.0;
};

/// Solve p . grad u + q u = rhs on the region for every time level, with u = 0 on its gamma nodes.
///
/// Differences are one-sided and point back toward gamma, so the solution is marched in from the
/// boundary portion. Where that neighbour falls outside the region the opposite one-sided
/// difference is used. The result is zero outside the region.
SpaceTimeField solve_transport(const Grid& grid, const VectorCoefficient& p, const CoefficientField& q,
                               const SpaceTimeField& rhs, const SubdomainMask& region,
                               const TransportOptions& options = {});

/// Largest absolute defect of the discrete transport equation produced by solve_transport.
double transport_residual(const Grid& grid, const VectorCoefficient& p, const CoefficientField& q,
                          const SpaceTimeField& rhs, const SubdomainMask& region, const SpaceTimeField& u,
                          const TransportOptions& options = {});

}  // namespace pinv
