#pragma once

#include "pinv/geometry.hpp"

namespace pinv {

// Spatial stencils: centered in the interior, second-order one-sided at edges.
SpatialField d1(const Grid& grid, const SpatialField& f, int axis);
SpatialField d2(const Grid& grid, const SpatialField& f, int axis);
SpatialField laplacian(const Grid& grid, const SpatialField& f);
/// Derivative of the given order along one axis, built from repeated second differences.
SpatialField dn(const Grid& grid, const SpatialField& f, int axis, int order);

SpaceTimeField d1(const Grid& grid, const SpaceTimeField& f, int axis);
SpaceTimeField laplacian(const Grid& grid, const SpaceTimeField& f);

/// Time derivative: centered at interior levels, second-order one-sided at the ends.
SpaceTimeField dt_centered(const Grid& grid, const SpaceTimeField& f);
/// Backward difference (level k uses k and k-1); level 0 copies level 1.
SpaceTimeField dt_backward(const Grid& grid, const SpaceTimeField& f);
/// Fourth-order one-sided time derivative at level k, looking forward (+1) or backward (-1).
SpatialField dt_onesided4(const Grid& grid, const SpaceTimeField& f, int k, int direction);
/// Fourth-order centered time derivative at level k.
SpatialField dt_centered4(const Grid& grid, const SpaceTimeField& f, int k);

/// Cumulative trapezoid integral from level k_anchor to every level (negative before the anchor).
SpaceTimeField integrate_from(const Grid& grid, const SpaceTimeField& f, int k_anchor);

/// Copy of the levels [k0, k1] as a field on its own grid of k1 - k0 steps.
SpaceTimeField restrict_window(const SpaceTimeField& f, int k0, int k1);

}  // namespace pinv
