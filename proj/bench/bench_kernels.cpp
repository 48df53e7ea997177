// Serial reference vs OpenMP kernels: the tc profile of the subordinated
// fit and the ABCDE batch simulation.

#include <benchmark/benchmark.h>

#include "lpplvv/abcde.hpp"
#include "lpplvv/estimators.hpp"

using namespace lpplvv;

namespace {

TimeSeries lppl_window(std::size_t n) {
  const LpplParams p{1.0, -0.6, 0.05, 0.5, 8.0, 1.0, 1.15 * static_cast<double>(n)};
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lppl_eval(p, static_cast<double>(i));
  return TimeSeries(0.0, 1.0, std::move(v));
}

void profile(benchmark::State& state, Execution ex) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto ts = lppl_window(n);
  const WindowSpec w{0, n - 1, WindowClass::half, -1};
  SearchConfig cfg;
  cfg.tc_grid.max_offset_fraction = 0.1;
  const auto tcs = tc_candidates(ts, w, cfg.tc_grid);
  for (auto _ : state) benchmark::DoNotOptimize(profile_subordinated(ts, w, tcs, cfg, ex));
  state.counters["tc_candidates"] = static_cast<double>(tcs.size());
}

void BM_ProfileSerial(benchmark::State& s) { profile(s, Execution::serial); }
void BM_ProfileParallel(benchmark::State& s) { profile(s, Execution::parallel); }

abcde::BatchConfig batch(std::size_t runs) {
  abcde::BatchConfig cfg;
  cfg.runs = runs;
  cfg.horizon = 20.0;
  return cfg;
}

void BM_BatchSerial(benchmark::State& s) {
  const auto cfg = batch(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(abcde::simulate_batch_serial(cfg));
}

void BM_BatchParallel(benchmark::State& s) {
  const auto cfg = batch(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) benchmark::DoNotOptimize(abcde::simulate_batch(cfg));
}

}  // namespace

BENCHMARK(BM_ProfileSerial)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProfileParallel)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchSerial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BatchParallel)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
