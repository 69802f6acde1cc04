#include "pinv/random_fields.hpp"

#include <cmath>
#include <numbers>

namespace pinv {

double Rng::normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

double axis_coord(const Grid& grid, int node, int axis) {
    return (grid.x(node, axis) - grid.lo(axis)) / (grid.hi(axis) - grid.lo(axis));
}

}  // namespace

SpatialField random_sine_field(const Grid& grid, Rng& rng, int modes, double amplitude) {
    const double pi = std::numbers::pi;
    SpatialField f(static_cast<std::size_t>(grid.nodes()), 0.0);
    int my = grid.dim() == 2 ? modes : 1;
    for (int m = 1; m <= modes; ++m) {
        for (int q = 1; q <= my; ++q) {
            double c = amplitude * rng.uniform(-1.0, 1.0) / (m * q);
            for (int n = 0; n < grid.nodes(); ++n) {
                double v = std::sin(m * pi * axis_coord(grid, n, 0));
                if (grid.dim() == 2) v *= std::sin(q * pi * axis_coord(grid, n, 1));
                f[static_cast<std::size_t>(n)] += c * v;
            }
        }
    }
    return f;
}

SpatialField random_smooth_field(const Grid& grid, Rng& rng, int modes, double amplitude) {
    const double pi = std::numbers::pi;
    SpatialField f(static_cast<std::size_t>(grid.nodes()), amplitude * rng.uniform(-1.0, 1.0));
    for (int m = 1; m <= modes; ++m) {
        for (int a = 0; a < grid.dim(); ++a) {
            double c = amplitude * rng.uniform(-1.0, 1.0) / m;
            double phase = rng.uniform(0.0, 2.0 * pi);
            for (int n = 0; n < grid.nodes(); ++n)
                f[static_cast<std::size_t>(n)] += c * std::cos(m * pi * axis_coord(grid, n, a) + phase);
        }
    }
    return f;
}

SpaceTimeField random_spacetime_field(const Grid& grid, Rng& rng, int modes, double amplitude) {
    SpaceTimeField out(grid);
    for (int m = 0; m < modes; ++m) {
        SpatialField shape = random_sine_field(grid, rng, modes, amplitude);
        double c0 = rng.uniform(-1.0, 1.0), c1 = rng.uniform(-1.0, 1.0), w = rng.uniform(0.5, 3.0);
        for (int k = 0; k < grid.levels(); ++k) {
            double t = grid.time(k) / grid.T();
            double g = c0 + c1 * std::cos(w * std::numbers::pi * t);
            for (int n = 0; n < grid.nodes(); ++n) out(k, n) += g * shape[static_cast<std::size_t>(n)];
        }
    }
    return out;
}

std::vector<double> random_time_series(Rng& rng, int n, double T, int modes, double amplitude) {
    std::vector<double> g(static_cast<std::size_t>(n), amplitude * rng.uniform(-1.0, 1.0));
    const double pi = std::numbers::pi;
    for (int m = 1; m <= modes; ++m) {
        double a = amplitude * rng.uniform(-1.0, 1.0) / m;
        double b = amplitude * rng.uniform(-1.0, 1.0) / m;
        for (int i = 0; i < n; ++i) {
            double t = T * i / (n - 1);
            g[static_cast<std::size_t>(i)] += a * std::cos(2.0 * pi * m * t / T) + b * std::sin(2.0 * pi * m * t / T);
        }
    }
    return g;
}

}  // namespace pinv
