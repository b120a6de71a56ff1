#include <benchmark/benchmark.h>

#include "tistop/equilibrium.hpp"
#include "tistop/payoff.hpp"
#include "tistop/rng.hpp"
#include "tistop/solvers.hpp"
#include "tistop/strategy.hpp"

using namespace tistop;

namespace {

void BM_PhiloxBlock(benchmark::State& state) {
    Philox4x64::Counter ctr{0, 0, 0, 0};
    const Philox4x64::Key key{0x0123456789abcdefULL, 0xfedcba9876543210ULL};
    for (auto _ : state) {
        benchmark::DoNotOptimize(Philox4x64::block(ctr, key));
        ++ctr[0];
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxBlock);

void BM_NormalDraw(benchmark::State& state) {
    PathStream rng(20190611, 0);
    for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NormalDraw);

void BM_SolveVariance(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(solve_variance_gbm(-0.1, 0.15));
}
BENCHMARK(BM_SolveVariance);

void BM_SolveMeanVariance(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(solve_mean_variance_gbm(0.07, 0.45, 1.1));
}
BENCHMARK(BM_SolveMeanVariance);

// One stopped path of the constant-intensity variance equilibrium from x = 1.
void BM_SampleStopConstantIntensity(benchmark::State& state) {
    const auto vs = solve_variance_gbm(-0.1, 0.15);
    const auto model = DiffusionModel::gbm(-0.1, 0.15);
    const auto strategy = vs.strategy();
    PathConfig c;
    c.dt = 1e-3;
    std::uint64_t i = 0;
    for (auto _ : state) {
        PathStream rng(c.seed, i++);
        benchmark::DoNotOptimize(sample_stop(model, strategy, 1.0, c, rng));
    }
}
BENCHMARK(BM_SampleStopConstantIntensity);

// First exit of the mean-variance threshold interval from x = 0.2.
void BM_SampleStopThreshold(benchmark::State& state) {
    const auto model = DiffusionModel::gbm(0.07, 0.45);
    const auto strategy = solve_mean_variance_gbm(0.07, 0.45, 1.1).strategy();
    PathConfig c;
    c.dt = static_cast<double>(state.range(0)) * 1e-4;
    std::uint64_t i = 0;
    for (auto _ : state) {
        PathStream rng(c.seed, i++);
        benchmark::DoNotOptimize(sample_stop(model, strategy, 0.2, c, rng));
    }
}
BENCHMARK(BM_SampleStopThreshold)->Arg(10)->Arg(100);

void BM_EstimateValues(benchmark::State& state) {
    const auto vs = solve_variance_gbm(-0.1, 0.15);
    const auto model = DiffusionModel::gbm(-0.1, 0.15);
    const auto problem = make_variance_problem();
    PathConfig c;
    c.dt = 1e-3;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(estimate_values(problem, model, vs.strategy(), 1.0, c, n));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateValues)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_FullReportClosedForm(benchmark::State& state) {
    const auto mv = solve_mean_variance_gbm(0.07, 0.45, 1.1);
    const auto problem = make_mean_variance_problem(1.1);
    const auto model = DiffusionModel::gbm(0.07, 0.45);
    const auto st = mv.strategy();
    const auto vf = *closed_form_value_functions(problem, model, st);
    ReportOptions o;
    o.grid = {0.01, 1.0, 100};
    for (auto _ : state) benchmark::DoNotOptimize(run_full_report(problem, model, st, vf, o));
}
BENCHMARK(BM_FullReportClosedForm)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
