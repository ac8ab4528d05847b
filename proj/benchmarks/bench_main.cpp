#include <benchmark/benchmark.h>

#include "platoon/dynamics.hpp"
#include "platoon/montecarlo.hpp"
#include "platoon/stability.hpp"

namespace {

using namespace platoon;

ControllerConfig nominal_gains(double h_w) {
  ControllerConfig c;
  c.k_a = 0.4;
  c.k_v = 1.0;
  c.k_p = 0.8;
  c.h_w = h_w;
  return c;
}

void BM_LagPropagatorStep(benchmark::State& state) {
  LagPropagator prop(0.5, 0.01);
  VehicleState s{0.0, 25.0, 0.0};
  double u = -1.0;
  for (auto _ : state) {
    s = prop.step(s, u);
    u = -u;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_LagPropagatorStep);

void BM_RunRealization(benchmark::State& state) {
  ScenarioConfig sc;
  sc.n_followers = static_cast<int>(state.range(0));
  sc.controller = nominal_gains(0.75);
  sc.vehicle.decel_limit = 50;
  sc.vehicle.accel_limit = 50;
  sc.channel = GilbertChannel{{0.3, 0.1, 0.2}};
  sc.leader = LeaderProfile{{{0.0, 0.0, {}}, {10.0, -9.0, 16.0}}};
  sc.duration_s = 40;
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_realization(sc, i++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sc.steps()));
}
BENCHMARK(BM_RunRealization)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_HinfNorm(benchmark::State& state) {
  const auto tf = cacc_error_tf(nominal_gains(0.75), 0.5, 0.4);
  for (auto _ : state) benchmark::DoNotOptimize(hinf_norm(tf));
}
BENCHMARK(BM_HinfNorm)->Unit(benchmark::kMicrosecond);

void BM_Lyapunov(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  Matrix a = -Matrix::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 0.5;
  const Matrix q = Matrix::Identity(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov_solve(a, q));
}
BENCHMARK(BM_Lyapunov)->Arg(3)->Arg(9)->Arg(15)->Unit(benchmark::kMicrosecond);

void BM_Theorem1Bound(benchmark::State& state) {
  const auto sys = cacc_error_system(nominal_gains(0.9), 0.5, 0.4);
  const std::vector<double> w0(4000, -1.0);
  for (auto _ : state) benchmark::DoNotOptimize(theorem1_bound(sys, 0.5, w0, 0.01));
}
BENCHMARK(BM_Theorem1Bound)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
