// OpenMP kernels against their serial counterparts.

#include <benchmark/benchmark.h>

#include "cbfhull/case_studies.h"
#include "cbfhull/controllers.h"
#include "cbfhull/explicit_filter.h"
#include "cbfhull/oracle.h"
#include "cbfhull/sim.h"

namespace {

using namespace cbfhull;

void BM_GridScanParallel(benchmark::State& state) {
  const Problem p = Case2().problem;
  ScanOptions opt;
  opt.per_edge = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(GridScan(p.map, p.hull, p.input_set, opt).min_margin);
}
BENCHMARK(BM_GridScanParallel)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

void BM_GridScanSerial(benchmark::State& state) {
  const Problem p = Case2().problem;
  ScanOptions opt;
  opt.per_edge = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        GridScanReference(p.map, p.hull, p.input_set, opt).min_margin);
}
BENCHMARK(BM_GridScanSerial)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

void BM_Partition(benchmark::State& state) {
  const Problem p = Case3().problem;
  PartitionOptions opt;
  opt.parallel = state.range(0) != 0;
  opt.seed_per_edge = 31;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        PartitionHull(p.map, p.hull, p.input_set, p.u_des, opt).regions().size());
}
BENCHMARK(BM_Partition)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BatchIntegrate(benchmark::State& state) {
  const CaseStudy cs = Case2();
  const Controller c = ConstantController(*cs.reference_witness);
  const auto x0s = RandomStates(cs.problem.hull, 16, cs.seed);
  const bool parallel = state.range(0) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        BatchIntegrate(*cs.dynamics, c, x0s, 10.0, cs.dt, cs.cbfs, parallel).size());
}
BENCHMARK(BM_BatchIntegrate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
