#include <benchmark/benchmark.h>

#include "dime/diffusion.hpp"
#include "dime/network.hpp"
#include "dime/tasp.hpp"

using namespace dime;

namespace {

UncertainNetwork bench_network(std::size_t n) {
  Rng rng(42);
  return decorate_uniform(generate_watts_strogatz(n, 6, 0.1, rng), 0.1, 0.6, 1.0, rng);
}

std::vector<ActionSet> bench_actions() { return {ActionSet({0, 17}), ActionSet({31, 45})}; }

void BM_InfluenceSerial(benchmark::State& state) {
  const auto net = bench_network(std::size_t(state.range(0)));
  const auto actions = bench_actions();
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_influence_serial(net, actions, 1, 20000, 7));
  }
}

void BM_InfluenceParallel(benchmark::State& state) {
  const auto net = bench_network(std::size_t(state.range(0)));
  const auto actions = bench_actions();
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_influence_parallel(net, actions, 1, 20000, 7));
  }
}

void tasp(benchmark::State& state, Execution execution) {
  const auto net = bench_network(std::size_t(state.range(0)));
  TaspConfig config;
  config.delta_count = 8;
  config.nsim = 256;
  config.execution = execution;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tasp_solve(net, 2, 5, 1, {}, config, 3));
  }
}

void BM_TaspSerial(benchmark::State& state) { tasp(state, Execution::serial); }
void BM_TaspParallel(benchmark::State& state) { tasp(state, Execution::parallel); }

}  // namespace

BENCHMARK(BM_InfluenceSerial)->Arg(60)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InfluenceParallel)->Arg(60)->Arg(250)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TaspSerial)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TaspParallel)->Arg(30)->Arg(60)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
