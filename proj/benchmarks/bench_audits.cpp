#include "pinv/carleman.hpp"
#include "pinv/forward.hpp"
#include "pinv/random_fields.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace pinv;

void BM_CarlemanSides2x2(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 51, 1.0, 200, 0.5);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    WeightSpec w = build_weight(g, omega);
    w.s = 10.0;
    Rng rng(1);
    CoefficientSet2x2 k;
    k.b = CoefficientField::constant(g, 1.0);
    k.c = CoefficientField::constant(g, 0.8);
    ProblemData d = ProblemData::zero(g, 2);
    d.sources = {random_spacetime_field(g, rng, 3, 1.0), random_spacetime_field(g, rng, 3, 1.0)};
    auto [u, v] = solve_2x2(k, d, g);
    for (auto _ : state)
        benchmark::DoNotOptimize(carleman_sides_2x2(g, k, u, v, d.sources[0], d.sources[1], w, omega));
}
BENCHMARK(BM_CarlemanSides2x2)->Unit(benchmark::kMillisecond);

void BM_Lemma31(benchmark::State& state) {
    Rng rng(2);
    std::vector<double> g = random_time_series(rng, static_cast<int>(state.range(0)), 1.0, 6, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(lemma31_check(g, 1.0, 10.0));
}
BENCHMARK(BM_Lemma31)->Arg(2001)->Arg(20001);

void BM_Lemma32(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 51, 1.0, 2000, 0.5);
    SubdomainMask omega = box_mask(g, "omega", {0.3, 0.0}, {0.6, 0.0});
    WeightSpec w = build_weight(g, omega);
    Rng rng(3);
    SpaceTimeField q = random_spacetime_field(g, rng, 4, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(lemma32_check(g, q, w, 10.0, 0.05));
}
BENCHMARK(BM_Lemma32)->Unit(benchmark::kMillisecond);

}  // namespace
