#include <benchmark/benchmark.h>

#include "stabilizer/experiments.hpp"
#include "stabilizer/lie.hpp"
#include "stabilizer/matrix.hpp"
#include "stabilizer/simulator.hpp"

namespace {

using namespace stabilizer;

void BM_ExpmSkew(benchmark::State& state) {
  const CnotExperiment e = build_cnot_system();
  Eigen::VectorXd u(6);
  u << 0.1, -0.2, 0.05, 0.3, -0.15, 0.02;
  const ComplexMatrix a = e.sys.combine(u);
  for (auto _ : state) benchmark::DoNotOptimize(expm_skew_unchecked(a, 25.0 / 4096));
}
BENCHMARK(BM_ExpmSkew);

void BM_ClosedLoopPeriod(benchmark::State& state) {
  const CnotExperiment e = build_cnot_system();
  const AmplitudeVector amps = deterministic_draw(e, 1, 0);
  const RunConfig config = cnot_run_config(e, e.goal1, FixedAmplitudes{amps}, 1,
                                           static_cast<int>(state.range(0)));
  const TrajectoryPair start{e.goal1, UnitaryMatrix::identity(4), 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(closed_loop_period(start, amps, config));
}
BENCHMARK(BM_ClosedLoopPeriod)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

void BM_LieClosure(benchmark::State& state) {
  const CnotExperiment e = build_cnot_system();
  for (auto _ : state) benchmark::DoNotOptimize(lie_closure(e.sys));
}
BENCHMARK(BM_LieClosure)->Unit(benchmark::kMicrosecond);

void BM_AdmissibilityRank(benchmark::State& state) {
  const CnotExperiment e = build_cnot_system();
  const AmplitudeVector amps = deterministic_draw(e, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(admissibility_rank(e.sys, amps, 25.0, 8));
}
BENCHMARK(BM_AdmissibilityRank)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
