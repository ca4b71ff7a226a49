#include <benchmark/benchmark.h>

#include "nucrec/nucrec.hpp"

using namespace nucrec;

namespace {

void BM_Svd(benchmark::State& state) {
    const auto n = state.range(0);
    RngStream rng(1);
    const Matrix m = sample_gaussian(n, n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(svd(m));
    state.SetComplexityN(n);
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(8, 128)->Complexity(benchmark::oNCubed);

void BM_Svt(benchmark::State& state) {
    const auto n = state.range(0);
    RngStream rng(2);
    const Matrix m = sample_gaussian(n, n, rng);
    const double tau = 0.5 * std::sqrt(static_cast<double>(n));
    for (auto _ : state) benchmark::DoNotOptimize(svt(m, tau));
}
BENCHMARK(BM_Svt)->Arg(20)->Arg(40);

void BM_AffineProjection(benchmark::State& state) {
    const auto n = state.range(0);
    RngStream rng(3);
    const LinearMap map = sample_linear_map(n * n / 2, n, n, rng);
    const AffineProblem problem = AffineProblem::from_planted(map, sample_low_rank(n, n, 2, rng));
    const AffineProjector proj(problem);
    const Matrix w = sample_gaussian(n, n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(proj.project(w));
}
BENCHMARK(BM_AffineProjection)->Arg(20)->Arg(30);

void BM_SolvePlanted(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    RngStream rng(4);
    const Matrix x0 = sample_low_rank(n, n, 2, rng);
    const LinearMap map = sample_linear_map(measurements_for(0.6, n), n, n, rng);
    const AffineProblem problem = AffineProblem::from_planted(map, x0);
    int iterations = 0;
    for (auto _ : state) {
        const RecoveryResult res = solve_min_nuclear(problem);
        iterations = res.iterations;
        benchmark::DoNotOptimize(res.X.data());
    }
    state.counters["admm_iterations"] = iterations;
}
BENCHMARK(BM_SolvePlanted)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
