#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "romfcc/curves.hpp"
#include "romfcc/monitor.hpp"
#include "romfcc/robpca.hpp"
#include "romfcc/simgen.hpp"

namespace {

using namespace romfcc;

Matrix gaussian(Eigen::Index n, Eigen::Index q, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(n, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng) * std::pow(0.8, static_cast<double>(j));
  return x;
}

void BM_SmoothGcv(benchmark::State& state) {
  SimScenario s = scenario_preset("S0");
  s.n = 100;
  const CurveSet set = generate(s).set;
  const BasisSystem basis = default_basis();
  for (auto _ : state) benchmark::DoNotOptimize(smooth_set(set, basis));
  state.SetItemsProcessed(state.iterations() * 100 * 10);
}
BENCHMARK(BM_SmoothGcv)->Unit(benchmark::kMillisecond);

void BM_FastMcd(benchmark::State& state) {
  const Matrix x = gaussian(500, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fast_mcd(x, 375, 7));
}
BENCHMARK(BM_FastMcd)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Robpca(benchmark::State& state) {
  const Matrix x = gaussian(500, 100, 2);
  for (auto _ : state) benchmark::DoNotOptimize(robpca(x, static_cast<std::size_t>(state.range(0)), 0.75, 3));
}
BENCHMARK(BM_Robpca)->Arg(10)->Arg(99)->Unit(benchmark::kMillisecond);

void BM_Phase1Robust(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const EigenStructure eig = build_eigenstructure(scenario_preset("S0"));
  SimScenario s = scenario_preset("S1-OutE-C3");
  s.n = n;
  s.seed = 1;
  const auto space = std::make_shared<const FunctionalSpace>(default_basis());
  const CurveSample train = smooth_set(generate(s, eig).set, space->basis);
  s.seed = 2;
  const CurveSample tune = smooth_set(generate(s, eig).set, space->basis);
  Phase1Config config;
  for (auto _ : state) benchmark::DoNotOptimize(phase1_fit(train, tune, space, config));
}
BENCHMARK(BM_Phase1Robust)->Arg(200)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
