#include "presets.hpp"

#include "pinv/forward.hpp"
#include "pinv/random_fields.hpp"

#include <cmath>

namespace pinv::cli {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ stream) ^ index);
}

ProblemData problem_data(const Grid& grid, const ConfigView& view, const std::vector<std::string>& components) {
    ProblemData d = ProblemData::zero(grid, static_cast<int>(components.size()));
    for (std::size_t c = 0; c < components.size(); ++c) {
        if (view.has("initial")) d.initial[c] = field_from(grid, view.sub("initial"), components[c]);
        if (view.has("boundary")) {
            SpatialField b = field_from(grid, view.sub("boundary"), components[c]);
            bool any = false;
            for (int n = 0; n < grid.nodes(); ++n)
                if (grid.on_boundary(n) && b[static_cast<std::size_t>(n)] != 0.0) any = true;
            if (!any) continue;
            SpaceTimeField bt(grid);
            for (int k = 0; k <= grid.nt(); ++k)
                for (int n = 0; n < grid.nodes(); ++n) bt(k, n) = b[static_cast<std::size_t>(n)];
            d.boundary[c] = std::move(bt);
        }
    }
    return d;
}

SpaceTimeField heat_solution(const Grid& grid, int mode) {
    SpaceTimeField u(grid);
    const double k = mode * M_PI;
    for (int l = 0; l <= grid.nt(); ++l)
        for (int n = 0; n < grid.nodes(); ++n) u(l, n) = std::sin(k * grid.x(n, 0)) * std::exp(-k * k * grid.time(l));
    return u;
}

Instance2x2 random_instance_2x2(const Grid& grid, std::uint64_t seed, double range) {
    Rng r(seed);
    CoefficientSet2x2 c;
    c.a = CoefficientField::constant(grid, r.uniform(-range, range));
    c.b = CoefficientField::constant(grid, r.uniform(0.5, 1.5) * range);
    c.c = CoefficientField::constant(grid, r.uniform(0.5, 1.5) * range);
    c.d = CoefficientField::constant(grid, r.uniform(-range, range));
    c.A = VectorCoefficient::uniform(grid, {r.uniform(-0.5, 0.5) * range, r.uniform(-0.5, 0.5) * range});
    c.B = VectorCoefficient::uniform(grid, {r.uniform(-0.5, 0.5) * range, r.uniform(-0.5, 0.5) * range});
    if (grid.dim() == 1) {
        c.A.comp[1] = {};
        c.B.comp[1] = {};
    }
    ProblemData d = ProblemData::zero(grid, 2);
    d.sources[0] = random_spacetime_field(grid, r, 3, 1.0);
    d.sources[1] = random_spacetime_field(grid, r, 3, 1.0);
    d.initial[0] = random_sine_field(grid, r, 3, 1.0);
    d.initial[1] = random_sine_field(grid, r, 3, 1.0);
    auto [u, v] = solve_2x2(c, d, grid);
    return {c, std::move(u), std::move(v), d.sources[0], d.sources[1]};
}

Instance3x3 random_instance_3x3(const Grid& grid, std::uint64_t seed, double range) {
    Rng r(seed);
    CoefficientSet3x3 c;
    for (auto& row : c.a)
        for (auto& e : row) e = CoefficientField::constant(grid, r.uniform(-range, range));
    c.a[0][2] = CoefficientField::constant(grid, r.uniform(0.5, 1.5) * range);
    c.a[0][1] = CoefficientField::from_function(grid, [](double x, double) { return 0.5 + x; });
    ProblemData d = ProblemData::zero(grid, 3);
    for (int k = 0; k < 3; ++k) {
        d.sources[static_cast<std::size_t>(k)] = random_spacetime_field(grid, r, 3, 1.0);
        d.initial[static_cast<std::size_t>(k)] = random_sine_field(grid, r, 3, 1.0);
    }
    auto X = solve_3x3(c, d, grid);
    return {c, std::move(X[0]), std::move(X[1]), std::move(X[2]), d.sources[0], d.sources[1], d.sources[2]};
}

StabilityPair random_stability_pair(const Grid& grid, const CoefficientSet2x2& tilde, std::uint64_t seed, int modes,
                                    double epsilon) {
    Rng r(seed);
    std::vector<double> a(static_cast<std::size_t>(modes)), b(static_cast<std::size_t>(modes));
    for (int m = 0; m < modes; ++m) {
        a[static_cast<std::size_t>(m)] = r.uniform(-1.0, 1.0) / (1.0 + m);
        b[static_cast<std::size_t>(m)] = r.uniform(-1.0, 1.0) / (1.0 + m);
    }
    StabilityPair p{tilde, SpatialField(static_cast<std::size_t>(grid.nodes()), 0.0),
                    SpatialField(static_cast<std::size_t>(grid.nodes()), 0.0)};
    for (int n = 0; n < grid.nodes(); ++n) {
        const double x = (grid.x(n, 0) - grid.lo(0)) / (grid.hi(0) - grid.lo(0));
        for (int m = 0; m < modes; ++m) {
            const double basis = std::cos(m * M_PI * x);
            p.f[static_cast<std::size_t>(n)] += epsilon * a[static_cast<std::size_t>(m)] * basis;
            p.g[static_cast<std::size_t>(n)] += epsilon * b[static_cast<std::size_t>(m)] * basis;
        }
    }
    return p;
}

SpaceTimeField random_transport_rhs(const Grid& grid, std::uint64_t seed) {
    Rng r(seed);
    double c[4];
    for (auto& x : c) x = r.uniform(-1.0, 1.0);
    SpaceTimeField f(grid);
    for (int k = 0; k <= grid.nt(); ++k)
        for (int n = 0; n < grid.nodes(); ++n) {
            const double x = grid.x(n, 0), t = grid.time(k);
            const double y = grid.dim() == 2 ? grid.x(n, 1) : 0.0;
            f(k, n) = c[0] * std::cos(3.0 * x + t) + c[1] * std::sin(7.0 * x * t) + c[2] + c[3] * (x - y);
        }
    return f;
}

}  // namespace pinv::cli
