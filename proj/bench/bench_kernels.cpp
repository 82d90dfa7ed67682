// Serial reference vs OpenMP paths of the hot kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "sharpcal/kernels.hpp"
#include "sharpcal/probe.hpp"
#include "sharpcal/scenarios.hpp"

using namespace sharpcal;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::serial : Execution::parallel; }

const Scenario& climatological() {
  static const Scenario s = make_climatological(random_truths(8, 1));
  return s;
}

void BM_PitDraws(benchmark::State& state) {
  const auto& s = climatological();
  const auto n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(draw_randomized_pit(s, n, 42, mode(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_PitDraws)->ArgsProduct({{0, 1}, {1 << 16, 1 << 20}})->Unit(benchmark::kMillisecond);

void BM_CalibrationResiduals(benchmark::State& state) {
  const auto& s = climatological();
  const auto grid = interior_grid(static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(calibration_residuals(s, grid, mode(state)));
}
BENCHMARK(BM_CalibrationResiduals)->ArgsProduct({{0, 1}, {512, 4096}})->Unit(benchmark::kMillisecond);

void BM_McOracle(benchmark::State& state) {
  static const Scenario s = make_compensated_pair(0.1);
  for (auto _ : state) benchmark::DoNotOptimize(mc_oracle(s, 1'000'000, 20, 7, mode(state)));
}
BENCHMARK(BM_McOracle)->Args({0})->Args({1})->Unit(benchmark::kMillisecond);

void BM_Probe(benchmark::State& state) {
  const std::vector<Distribution> truths(4, uniform(0, 1));
  ProbeOptions o;
  o.budget = 100;
  o.seed = 3;
  o.execution = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(minimize_sharpness(truths, o));
}
BENCHMARK(BM_Probe)->Args({0})->Args({1})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
