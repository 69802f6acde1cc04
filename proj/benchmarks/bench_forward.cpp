#include "pinv/forward.hpp"
#include "pinv/random_fields.hpp"
#include "pinv/transport.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace pinv;

CoefficientSet2x2 coupled(const Grid& g) {
    CoefficientSet2x2 k;
    k.a = CoefficientField::constant(g, 0.5);
    k.b = CoefficientField::constant(g, 1.0);
    k.c = CoefficientField::constant(g, 0.8);
    k.d = CoefficientField::constant(g, -0.2);
    k.A = VectorCoefficient::uniform(g, {0.3, 0.0});
    k.B = VectorCoefficient::uniform(g, {0.1, 0.0});
    return k;
}

ProblemData sine_data(const Grid& g, int components) {
    ProblemData d = ProblemData::zero(g, components);
    for (int n = 0; n < g.nodes(); ++n) d.initial[0][static_cast<std::size_t>(n)] = std::sin(M_PI * g.x(n));
    return d;
}

void BM_Solve2x2(benchmark::State& state) {
    const int nx = static_cast<int>(state.range(0));
    Grid g = Grid::make_1d(0.0, 1.0, nx, 1.0, 10 * (nx - 1), 0.5);
    CoefficientSet2x2 k = coupled(g);
    ProblemData d = sine_data(g, 2);
    for (auto _ : state) benchmark::DoNotOptimize(solve_2x2(k, d, g));
    state.SetComplexityN(static_cast<long>(nx) * 10 * (nx - 1));
}
BENCHMARK(BM_Solve2x2)->Arg(51)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Solve3x3(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 101, 1.0, 1000, 0.5);
    const double m[3][3] = {{0.2, 1.0, 0.8}, {0.5, -0.1, 0.3}, {0.4, 0.6, 0.1}};
    CoefficientSet3x3 k;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k.a[i][j] = CoefficientField::constant(g, m[i][j]);
    ProblemData d = sine_data(g, 3);
    for (auto _ : state) benchmark::DoNotOptimize(solve_3x3(k, d, g));
}
BENCHMARK(BM_Solve3x3)->Unit(benchmark::kMillisecond);

void BM_Solve2x2_TimeDependent(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 101, 1.0, 500, 0.5);
    CoefficientSet2x2 k = coupled(g);
    k.a = CoefficientField::from_function_t(g, [](double x, double, double t) { return 0.5 + x * t; });
    ProblemData d = sine_data(g, 2);
    for (auto _ : state) benchmark::DoNotOptimize(solve_2x2(k, d, g));
}
BENCHMARK(BM_Solve2x2_TimeDependent)->Unit(benchmark::kMillisecond);

void BM_Adjoint2x2(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 101, 1.0, 1000, 0.5);
    CoefficientSet2x2 k = coupled(g);
    Rng rng(1);
    SpatialField p = random_sine_field(g, rng, 3, 1.0), q = random_sine_field(g, rng, 3, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_adjoint_2x2(k, {p, q}, g));
}
BENCHMARK(BM_Adjoint2x2)->Unit(benchmark::kMillisecond);

void BM_Transport(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 401, 1.0, 200, 0.5);
    SubdomainMask omega = box_mask(g, "omega", {0.0, 0.0}, {0.4, 0.0});
    VectorCoefficient p = VectorCoefficient::uniform(g, {1.0, 0.0});
    CoefficientField q = CoefficientField::constant(g, 0.5);
    SpaceTimeField f(g, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_transport(g, p, q, f, omega));
}
BENCHMARK(BM_Transport)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
