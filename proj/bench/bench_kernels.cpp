// Serial reference kernels against their OpenMP counterparts.
// Run with --benchmark_filter=... ; arg 0 is serial, 1 is parallel.

#include <benchmark/benchmark.h>

#include "qsbse/indicators.hpp"
#include "qsbse/moqa.hpp"
#include "qsbse/sampler.hpp"

using namespace qsbse;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

const ProblemInstance& nrp() {
  static const ProblemInstance inst = generate_nrp(60, 40, 0.05, 1);
  return inst;
}

ParetoArchive cloud(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  ParetoArchive a;
  a.senses = {Sense::minimize, Sense::maximize, Sense::minimize};
  for (std::size_t i = 0; i < n; ++i)
    a.solutions.push_back({Bits(1, 0), {rng.uniform() * 100, rng.uniform() * 100, rng.uniform() * 100}});
  return a;
}

void BM_Anneal(benchmark::State& state) {
  const auto q = compile(nrp(), weight_for(2, 0, 0), {});
  SamplerSpec spec;
  spec.reads = 64;
  spec.sweeps = 500;
  spec.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(simulated_annealing(q, spec));
}
BENCHMARK(BM_Anneal)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Exact(benchmark::State& state) {
  const auto q = compile(generate_nrp(12, 8, 0.2, 2), weight_for(2, 0, 0), {});
  for (auto _ : state) benchmark::DoNotOptimize(exact_lowest(q, 16, exec_of(state)));
}
BENCHMARK(BM_Exact)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Igd(benchmark::State& state) {
  const auto a = cloud(4000, 1), r = cloud(4000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(igd(a, r, exec_of(state)));
}
BENCHMARK(BM_Igd)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Spacing(benchmark::State& state) {
  const auto a = cloud(4000, 3);
  for (auto _ : state) benchmark::DoNotOptimize(spacing(a, exec_of(state)));
}
BENCHMARK(BM_Spacing)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_MoqaWeights(benchmark::State& state) {
  MoqaConfig cfg;
  cfg.n_weights = 8;
  cfg.reads = 32;
  cfg.sampler.sweeps = 300;
  cfg.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(moqa(nrp(), cfg));
}
BENCHMARK(BM_MoqaWeights)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
