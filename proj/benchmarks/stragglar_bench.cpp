#include <benchmark/benchmark.h>

#include <random>

#include "stragglar/cost_model.hpp"
#include "stragglar/even_generator.hpp"
#include "stragglar/generate.hpp"
#include "stragglar/stragglar_generator.hpp"
#include "stragglar/verifier.hpp"
#include "stragglar/weighted_matching.hpp"

namespace {

using namespace stragglar;

void BM_GenerateStragglar(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(generate_stragglar(n));
}
BENCHMARK(BM_GenerateStragglar)->RangeMultiplier(2)->Range(4, 256)->Unit(benchmark::kMillisecond);

void BM_GenerateEven(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto policy = state.range(1) ? EvenPolicy::Tuned : EvenPolicy::Default;
  for (auto _ : state) benchmark::DoNotOptimize(generate_stragglar_even(n, policy));
}
BENCHMARK(BM_GenerateEven)->ArgsProduct({{6, 12, 24, 48}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_VerifyStragglar(benchmark::State& state) {
  const Schedule s = generate_stragglar(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(verify_schedule(s));
}
BENCHMARK(BM_VerifyStragglar)->RangeMultiplier(4)->Range(4, 256)->Unit(benchmark::kMillisecond);

void BM_MaxWeightMatching(benchmark::State& state) {
  const int nv = static_cast<int>(state.range(0));
  std::mt19937 rng(1);
  WeightedGraph g{nv, {}};
  for (int u = 0; u < nv; ++u)
    for (int v = u + 1; v < nv; ++v)
      if (rng() % 4 == 0) g.edges.push_back({u, v, 1 + static_cast<int>(rng() % 2)});
  for (auto _ : state) benchmark::DoNotOptimize(max_weight_matching(g));
}
BENCHMARK(BM_MaxWeightMatching)->RangeMultiplier(4)->Range(16, 256);

void BM_ScheduleCost(benchmark::State& state) {
  const Schedule s = generate_schedule(Algorithm::Ring, static_cast<int>(state.range(0)));
  const AlphaBetaParams p;
  for (auto _ : state) benchmark::DoNotOptimize(schedule_cost(s, 1073741824.0, p));
}
BENCHMARK(BM_ScheduleCost)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
