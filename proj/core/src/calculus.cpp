#include "pinv/calculus.hpp"

#include "pinv/errors.hpp"

namespace pinv {

namespace {

int stride_of(const Grid& grid, int axis) { return axis == 0 ? 1 : grid.nx(0); }

void check_axis(const Grid& grid, const SpatialField& f, int axis) {
    if (static_cast<int>(f.size()) != grid.nodes()) throw DimensionError("field does not match grid");
    if (axis < 0 || axis >= grid.dim()) throw DimensionError("axis out of range");
}

}  // namespace

SpatialField d1(const Grid& grid, const SpatialField& f, int axis) {
    check_axis(grid, f, axis);
    const int s = stride_of(grid, axis);
    const int n = grid.nx(axis);
    const double h = grid.dx(axis);
    SpatialField out(f.size());
    for (int node = 0; node < grid.nodes(); ++node) {
        int c = grid.coord(node, axis);
        const double* p = f.data() + node;
        double v;
        if (c == 0)
            v = (-3.0 * p[0] + 4.0 * p[s] - p[2 * s]) / (2.0 * h);
        else if (c == n - 1)
            v = (3.0 * p[0] - 4.0 * p[-s] + p[-2 * s]) / (2.0 * h);
        else
            v = (p[s] - p[-s]) / (2.0 * h);
        out[static_cast<std::size_t>(node)] = v;
    }
    return out;
}

SpatialField d2(const Grid& grid, const SpatialField& f, int axis) {
    check_axis(grid, f, axis);
    const int s = stride_of(grid, axis);
    const int n = grid.nx(axis);
    const double h2 = grid.dx(axis) * grid.dx(axis);
    SpatialField out(f.size());
    for (int node = 0; node < grid.nodes(); ++node) {
        int c = grid.coord(node, axis);
        const double* p = f.data() + node;
        double v;
        if (c == 0)
            v = (2.0 * p[0] - 5.0 * p[s] + 4.0 * p[2 * s] - p[3 * s]) / h2;
        else if (c == n - 1)
            v = (2.0 * p[0] - 5.0 * p[-s] + 4.0 * p[-2 * s] - p[-3 * s]) / h2;
        else
            v = (p[s] - 2.0 * p[0] + p[-s]) / h2;
        out[static_cast<std::size_t>(node)] = v;
    }
    return out;
}

SpatialField laplacian(const Grid& grid, const SpatialField& f) {
    SpatialField out = d2(grid, f, 0);
    if (grid.dim() == 2) {
        SpatialField yy = d2(grid, f, 1);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += yy[i];
    }
    return out;
}

SpatialField dn(const Grid& grid, const SpatialField& f, int axis, int order) {
    SpatialField out = f;
    for (int r = order; r >= 2; r -= 2) out = d2(grid, out, axis);
    if (order % 2 == 1) out = d1(grid, out, axis);
    return out;
}

SpaceTimeField d1(const Grid& grid, const SpaceTimeField& f, int axis) {
    SpaceTimeField out(f.nodes(), f.levels());
    for (int k = 0; k < f.levels(); ++k) out.set_level(k, d1(grid, f.level(k), axis));
    return out;
}

SpaceTimeField laplacian(const Grid& grid, const SpaceTimeField& f) {
    SpaceTimeField out(f.nodes(), f.levels());
    for (int k = 0; k < f.levels(); ++k) out.set_level(k, laplacian(grid, f.level(k)));
    return out;
}

SpaceTimeField dt_centered(const Grid& grid, const SpaceTimeField& f) {
    const int L = f.levels();
    if (L < 3) throw StencilError("time derivative needs at least 3 levels");
    const double dt = grid.dt();
    SpaceTimeField out(f.nodes(), L);
    for (int n = 0; n < f.nodes(); ++n) {
        out(0, n) = (-3.0 * f(0, n) + 4.0 * f(1, n) - f(2, n)) / (2.0 * dt);
        out(L - 1, n) = (3.0 * f(L - 1, n) - 4.0 * f(L - 2, n) + f(L - 3, n)) / (2.0 * dt);
        for (int k = 1; k < L - 1; ++k) out(k, n) = (f(k + 1, n) - f(k - 1, n)) / (2.0 * dt);
    }
    return out;
}

SpaceTimeField dt_backward(const Grid& grid, const SpaceTimeField& f) {
    const double dt = grid.dt();
    SpaceTimeField out(f.nodes(), f.levels());
    for (int k = 1; k < f.levels(); ++k)
        for (int n = 0; n < f.nodes(); ++n) out(k, n) = (f(k, n) - f(k - 1, n)) / dt;
    if (f.levels() > 1)
        for (int n = 0; n < f.nodes(); ++n) out(0, n) = out(1, n);
    return out;
}

SpatialField dt_onesided4(const Grid& grid, const SpaceTimeField& f, int k, int direction) {
    const int d = direction >= 0 ? 1 : -1;
    if (k + 4 * d < 0 || k + 4 * d >= f.levels()) throw StencilError("one-sided time stencil leaves the window");
    const double c[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
    SpatialField out(static_cast<std::size_t>(f.nodes()), 0.0);
    for (int n = 0; n < f.nodes(); ++n) {
        double v = 0.0;
        for (int j = 0; j < 5; ++j) v += c[j] * f(k + j * d, n);
        out[static_cast<std::size_t>(n)] = d * v / (12.0 * grid.dt());
    }
    return out;
}

SpatialField dt_centered4(const Grid& grid, const SpaceTimeField& f, int k) {
    if (k < 2 || k + 2 >= f.levels()) throw StencilError("centered time stencil leaves the window");
    SpatialField out(static_cast<std::size_t>(f.nodes()), 0.0);
    for (int n = 0; n < f.nodes(); ++n)
        out[static_cast<std::size_t>(n)] =
            (f(k - 2, n) - 8.0 * f(k - 1, n) + 8.0 * f(k + 1, n) - f(k + 2, n)) / (12.0 * grid.dt());
    return out;
}

SpaceTimeField integrate_from(const Grid& grid, const SpaceTimeField& f, int k_anchor) {
    const double h = 0.5 * grid.dt();
    SpaceTimeField out(f.nodes(), f.levels());
    for (int n = 0; n < f.nodes(); ++n) {
        for (int k = k_anchor + 1; k < f.levels(); ++k) out(k, n) = out(k - 1, n) + h * (f(k - 1, n) + f(k, n));
        for (int k = k_anchor - 1; k >= 0; --k) out(k, n) = out(k + 1, n) - h * (f(k + 1, n) + f(k, n));
    }
    return out;
}

SpaceTimeField restrict_window(const SpaceTimeField& f, int k0, int k1) {
    if (k0 < 0 || k1 >= f.levels() || k0 > k1) throw DimensionError("window outside field");
    SpaceTimeField out(f.nodes(), k1 - k0 + 1);
    for (int k = k0; k <= k1; ++k) out.set_level(k - k0, f.level(k));
    return out;
}

}  // namespace pinv
