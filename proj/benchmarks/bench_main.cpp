#include <random>

#include <benchmark/benchmark.h>

#include "nanorotor/runner.hpp"
#include "nanorotor/spectrum.hpp"
#include "nanorotor/stochastic_sim.hpp"

using namespace nanorotor;

namespace {

ScenarioConfig row(int n) { return load_config(std::string(NANOROTOR_CONFIG_DIR) + "/table1_row" + std::to_string(n) + ".cfg"); }

void BM_EquationsOfMotion(benchmark::State& state) {
  const ScenarioConfig cfg = row(4);
  const AnalysisResult a = analyze_scenario(cfg);
  const Setup s = cfg.setup();
  const StateVector x = pack(sample_steady_state(s, a.model, a.modes, a.heating, a.report, 1));
  StateVector dx{};
  for (auto _ : state) {
    equations_of_motion(s, x, dx);
    benchmark::DoNotOptimize(dx);
  }
}
BENCHMARK(BM_EquationsOfMotion);

void BM_Analyze(benchmark::State& state) {
  const ScenarioConfig cfg = row(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(analyze_scenario(cfg));
}
BENCHMARK(BM_Analyze)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

// 1000 Langevin steps of the full nonlinear model
void BM_IntegrateSteps(benchmark::State& state) {
  const ScenarioConfig cfg = row(4);
  const AnalysisResult a = analyze_scenario(cfg);
  const Setup s = cfg.setup();
  const NoiseModel noise = noise_model(s, cfg.environment, a.model);
  const MechanicalState start = sample_steady_state(s, a.model, a.modes, a.heating, a.report, 2);
  SimulationOptions opt;
  opt.dt = max_time_step(s, a.model);
  opt.duration = 1000 * opt.dt;
  opt.sample_stride = 1000;
  for (auto _ : state) integrate(start, s, noise, opt, [](double, const StateVector& x) { benchmark::DoNotOptimize(x); });
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_IntegrateSteps)->Unit(benchmark::kMillisecond);

void BM_WelchPsd(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = {normal(rng), normal(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(welch_psd(x, 1e-7, 16, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_WelchPsd)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
