// Serial reference vs OpenMP kernels. Arg 0 selects the serial path, 1 the parallel one.

#include <benchmark/benchmark.h>

#include "stochimc/apps.hpp"
#include "stochimc/bitstream.hpp"
#include "stochimc/reliability.hpp"

using namespace stochimc;

namespace {

ExecPolicy policy_of(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::Serial : ExecPolicy::Parallel;
}

void BM_EncodeUnipolar(benchmark::State& state) {
  RandomSource source(1);
  for (auto _ : state) benchmark::DoNotOptimize(encode_unipolar(0.37, 1 << 20, source, std::nullopt, policy_of(state)));
  state.SetItemsProcessed(state.iterations() * (1 << 20));
}

void BM_AppInstances(benchmark::State& state) {
  ArchConfig cfg;
  auto input = synthetic_input(AppKind::Ol, 32, 1);
  EvalOptions opts;
  opts.engine = Engine::Functional;
  opts.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(stochastic_eval(input, cfg, RandomSource(2), opts));
}

void BM_SweepTrials(benchmark::State& state) {
  ArchConfig cfg;
  auto input = synthetic_input(AppKind::Hdp, 64, 1);
  auto rates = default_flip_rates();
  SweepOptions opts;
  opts.trials = 30;
  opts.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(error_sweep(input, rates, cfg, RandomSource(3), opts));
}

}  // namespace

BENCHMARK(BM_EncodeUnipolar)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AppInstances)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepTrials)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
