#include <benchmark/benchmark.h>

#include "dobc/satellite.hpp"
#include "dobc/simulator.hpp"
#include "dobc/synthesis.hpp"

using namespace dobc;

namespace {

ControllerParams satellite_params(double tau) {
  return make_controller_params(RelativeDegree({2, 2}), {Vec{{15.0, 8.0}}, Vec{{15.0, 8.0}}}, tau,
                                Vec::Constant(1, 25.0), Vec::Constant(1, 100.0), 1.0);
}

SatelliteModel satellite() {
  return satellite_plant(SatelliteParams::defaults(), satellite_default_feedback(), NominalGainKind::Nonlinear, 1.2);
}

void BM_NyquistCheck(benchmark::State& state) {
  const Vec a{{15.0, 8.0}};
  FrequencyGrid grid;
  grid.points = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nyquist_check(a, SectorDisk(0.001), grid));
}
BENCHMARK(BM_NyquistCheck)->Arg(1000)->Arg(10000);

void BM_SearchA1(benchmark::State& state) {
  const Vec inner{{2.0, 3.0}};
  for (auto _ : state) benchmark::DoNotOptimize(search_a1(inner, SectorDisk(0.2), A1Bracket{}, FrequencyGrid{}));
}
BENCHMARK(BM_SearchA1)->Unit(benchmark::kMillisecond);

void BM_ClosedLoop(benchmark::State& state) {
  const auto m = satellite();
  const double tau = 1e-3;
  const auto params = satellite_params(tau);
  SimConfig c;
  c.tau = tau;
  c.step = tau / 20.0;
  c.t_end = static_cast<double>(state.range(0)) * c.step;
  c.record_stride = static_cast<int>(state.range(0));
  c.x0 = Vec{{1.0, -2.0, 0.0, -0.8}};
  for (auto _ : state) benchmark::DoNotOptimize(simulate_closed_loop(m.plant, m.nominal, params, c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ClosedLoop)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
