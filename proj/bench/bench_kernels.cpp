// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "morsefield/curvature.hpp"
#include "morsefield/fermi.hpp"
#include "morsefield/fixtures.hpp"
#include "morsefield/morse.hpp"

using namespace morsefield;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::kSerial : Execution::kParallel; }

void BM_FermiChart(benchmark::State& state) {
  const MetricPatch g = fixtures::sheared_flat();
  FermiOptions o;
  o.cells_x = 24;
  o.cells_t = 12;
  o.exec = mode(state);
  const std::vector<double> c{0.0, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(fermi_chart(g, c, o).residuals.max());
}

void BM_Census(benchmark::State& state) {
  const MetricPatch g = fixtures::fixture_c();
  CensusOptions o;
  o.exec = mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(find_critical_points(g, o).points.size());
}

void BM_Minimality(benchmark::State& state) {
  const MetricPatch g = fixtures::random_minimal(1);
  for (auto _ : state) benchmark::DoNotOptimize(minimality_report(g, 1e-8, 33, mode(state)).max_abs_H);
}

}  // namespace

BENCHMARK(BM_FermiChart)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Census)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Minimality)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
