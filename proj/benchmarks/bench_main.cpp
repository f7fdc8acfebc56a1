#include <benchmark/benchmark.h>

#include "cpks/dynamics.hpp"
#include "cpks/elliptic.hpp"
#include "cpks/experiment.hpp"
#include "cpks/inequalities.hpp"
#include "cpks/transforms.hpp"

namespace {

void BM_RoundTripTransform(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const cpks::Grid grid = cpks::make_grid(n, 65, n);
  const cpks::State s = cpks::random_state(grid, 7);
  for (auto _ : st) {
    const auto phys = cpks::transform_to_physical(s.n, grid);
    benchmark::DoNotOptimize(cpks::transform_to_spectral(phys, grid));
  }
}
BENCHMARK(BM_RoundTripTransform)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SolveChemo(benchmark::State& st) {
  const int ny = static_cast<int>(st.range(0));
  const cpks::Grid grid = cpks::make_grid(8, ny, 8);
  cpks::Profile n(ny, cpks::Complex(1.0, 0.5));
  for (auto _ : st) benchmark::DoNotOptimize(cpks::elliptic::solve_chemo(n, {1, 2}, grid));
}
BENCHMARK(BM_SolveChemo)->Arg(65)->Arg(257)->Arg(1025);

void BM_StepperStep(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const cpks::Grid grid = cpks::make_grid(n, 65, n);
  cpks::Params p;
  p.A = 1e3;
  p.dt = 1e-3;
  cpks::Stepper stepper(grid, p, p.dt);
  cpks::State s = cpks::random_state(grid, 3);
  for (auto _ : st) {
    auto r = stepper.step(s);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_StepperStep)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_A3Ratio(benchmark::State& st) {
  const cpks::inequalities::PlaneGrid grid(129, 64);
  const auto f = cpks::inequalities::random_test_function(grid, 11);
  for (auto _ : st) benchmark::DoNotOptimize(cpks::inequalities::lemma_a3_ratio(f));
}
BENCHMARK(BM_A3Ratio);

}  // namespace

BENCHMARK_MAIN();
