#include "pinv/control.hpp"
#include "pinv/inverse.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace pinv;

VariationalProblem variational_problem(const Grid& g) {
    CoefficientSet2x2 known;
    known.a = CoefficientField::constant(g, 0.5);
    known.d = CoefficientField::constant(g, -0.2);
    ProblemData ref = ProblemData::zero(g, 2);
    for (int n = 0; n < g.nodes(); ++n) {
        ref.initial[0][static_cast<std::size_t>(n)] = 1 + 0.5 * std::sin(M_PI * g.x(n));
        ref.initial[1][static_cast<std::size_t>(n)] = 1 + 0.3 * std::sin(M_PI * g.x(n));
    }
    ref.boundary = {SpaceTimeField(g, 1.0), SpaceTimeField(g, 1.0)};
    const auto N = static_cast<std::size_t>(g.nodes());
    return {g, known, ref, box_mask(g, "omega", {0.2, 0.0}, {0.5, 0.0}), SpatialField(N, 1.0), SpatialField(N, 0.8)};
}

void BM_ObjectiveWithGradient(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 51, 1.0, 200, 0.5);
    VariationalProblem p = variational_problem(g);
    Observation obs = make_observation(p, p.b_prior, p.c_prior, 0.0, 1);
    VariationalObjective J(p, obs, 1e-8);
    SpatialField gb, gc;
    for (auto _ : state) benchmark::DoNotOptimize(J.evaluate(p.b_prior, p.c_prior, &gb, &gc));
}
BENCHMARK(BM_ObjectiveWithGradient)->Unit(benchmark::kMillisecond);

void BM_MatchedDifferenceRate(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 201, 1.0, 2000, 0.5);
    CoefficientSet2x2 k;
    k.b = CoefficientField::constant(g, 1.0);
    k.c = CoefficientField::constant(g, 0.8);
    FieldSet sources{SpaceTimeField(g, 1.0), SpaceTimeField(g, 0.5)};
    for (auto _ : state) benchmark::DoNotOptimize(matched_difference_rate(g, SystemOperator::from(k), sources));
}
BENCHMARK(BM_MatchedDifferenceRate)->Unit(benchmark::kMillisecond);

void BM_Control2x2(benchmark::State& state) {
    Grid g = Grid::make_1d(0.0, 1.0, 51, 0.5, 200, 0.25);
    CoefficientSet2x2 k;
    k.a = CoefficientField::constant(g, 0.5);
    k.b = CoefficientField::constant(g, 0.2);
    k.c = CoefficientField::constant(g, 1.0);
    k.d = CoefficientField::constant(g, -0.3);
    k.B = VectorCoefficient::uniform(g, {0.5, 0.0});
    ControlProblem p;
    p.grid = g;
    p.data = ProblemData::zero(g, 2);
    p.omega = box_mask(g, "omega", {0.0, 0.0}, {0.3, 0.0});
    p.target = {SpatialField(51), SpatialField(51)};
    for (int n = 0; n < 51; ++n) {
        p.data.initial[0][static_cast<std::size_t>(n)] = std::sin(M_PI * g.x(n));
        p.target[0][static_cast<std::size_t>(n)] = 0.5 * std::sin(M_PI * g.x(n));
        p.target[1][static_cast<std::size_t>(n)] = 0.3 * std::sin(M_PI * g.x(n));
    }
    for (auto _ : state) benchmark::DoNotOptimize(synthesize_control_2x2(p, k));
}
BENCHMARK(BM_Control2x2)->Unit(benchmark::kMillisecond);

}  // namespace
