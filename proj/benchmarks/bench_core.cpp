#include <benchmark/benchmark.h>

#include <vector>

#include "qswitch/analysis.hpp"
#include "qswitch/dynamics.hpp"
#include "qswitch/protocols.hpp"
#include "qswitch/spectra.hpp"

using namespace qswitch;

namespace {

ScenarioParams two_level(double kappa_wq = 5) {
  ScenarioParams p;
  p.g_s = 5;
  p.g_q = 20;
  p.delta_q = 2;
  p.kappa_wq = kappa_wq;
  return p;
}

void BM_Eigensystem(benchmark::State& state) {
  auto p = two_level();
  p.levels_s = static_cast<int>(state.range(0));
  p.Omega_s.assign(static_cast<std::size_t>(p.levels_s - 2), 5.0);
  p.delta_s_i.assign(static_cast<std::size_t>(p.levels_s - 2), 0.0);
  const auto m = build_matrix(p, 0.0, 30.0);
  for (auto _ : state) benchmark::DoNotOptimize(eigensystem(m));
}
BENCHMARK(BM_Eigensystem)->Arg(2)->Arg(3)->Arg(4);

void BM_TrackBranches(benchmark::State& state) {
  std::vector<double> grid;
  for (int k = 0; k < state.range(0); ++k) grid.push_back(-20 + 90.0 * k / static_cast<double>(state.range(0) - 1));
  for (auto _ : state) benchmark::DoNotOptimize(track_branches(two_level(), Knob::DeltaQ, grid));
}
BENCHMARK(BM_TrackBranches)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_IntegrateRk4(benchmark::State& state) {
  const auto p = two_level();
  const auto sweep = SweepProfile::linear(Knob::DeltaQ, 0, 13, -5, 57);
  const auto psi0 = storage_branch_state(p, 0, 1);
  IntegratorSettings s;
  s.t_end = 60;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(p, sweep, psi0, DriveField::zero(), s));
}
BENCHMARK(BM_IntegrateRk4)->Unit(benchmark::kMillisecond);

void BM_IntegrateDopri5(benchmark::State& state) {
  const auto p = two_level();
  const auto sweep = SweepProfile::linear(Knob::DeltaQ, 0, 13, -5, 57);
  const auto psi0 = storage_branch_state(p, 0, 1);
  IntegratorSettings s;
  s.t_end = 60;
  s.method = IntegratorSettings::Method::DormandPrince;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(p, sweep, psi0, DriveField::zero(), s));
}
BENCHMARK(BM_IntegrateDopri5)->Unit(benchmark::kMillisecond);

void BM_PulseMetrics(benchmark::State& state) {
  const auto r = shaped_emission_linear(two_level(), 13);
  for (auto _ : state) benchmark::DoNotOptimize(pulse_metrics(r.run.output));
}
BENCHMARK(BM_PulseMetrics)->Unit(benchmark::kMillisecond);

void BM_ShapedEmission(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(shaped_emission_linear(two_level(), 13));
}
BENCHMARK(BM_ShapedEmission)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
