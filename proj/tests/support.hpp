#pragma once

#include "pinv/coefficients.hpp"
#include "pinv/geometry.hpp"

#include <cmath>
#include <functional>

namespace pinv::test {

inline Grid unit_grid(int nx = 41, int nt = 80, double T = 1.0, double theta = 0.5) {
    return Grid::make_1d(0.0, 1.0, nx, T, nt, theta);
}

inline SpatialField sample(const Grid& grid, const std::function<double(double)>& fn) {
    SpatialField out(static_cast<std::size_t>(grid.nodes()));
    for (int n = 0; n < grid.nodes(); ++n) out[static_cast<std::size_t>(n)] = fn(grid.x(n));
    return out;
}

inline SpaceTimeField sample(const Grid& grid, const std::function<double(double, double)>& fn) {
    SpaceTimeField out(grid);
    for (int k = 0; k < grid.levels(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) out(k, n) = fn(grid.x(n), grid.time(k));
    return out;
}

inline double max_abs_diff(const SpatialField& a, const SpatialField& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
    return max_abs_diff(a.data(), b.data());
}

inline CoefficientSet2x2 constant_coefficients(const Grid& grid, double a, double b, double c, double d,
                                               double A = 0.0, double B = 0.0, double C = 0.0, double D = 0.0) {
    CoefficientSet2x2 k;
    k.a = CoefficientField::constant(grid, a);
    k.b = CoefficientField::constant(grid, b);
    k.c = CoefficientField::constant(grid, c);
    k.d = CoefficientField::constant(grid, d);
    k.A = VectorCoefficient::uniform(grid, {A, 0.0});
    k.B = VectorCoefficient::uniform(grid, {B, 0.0});
    k.C = VectorCoefficient::uniform(grid, {C, 0.0});
    k.D = VectorCoefficient::uniform(grid, {D, 0.0});
    return k;
}

}  // namespace pinv::test
