#include <benchmark/benchmark.h>

#include "denitsim/biofilter.hpp"
#include "denitsim/control.hpp"
#include "denitsim/scenario.hpp"

using namespace denitsim;

namespace {

const InfluentState kInfluent{45000.0, 15.0, 0.5, 5.0};

void bm_plant_derivatives(benchmark::State& state) {
  Biofilter plant(BiofilterConfig{}, KineticParams{});
  PlantState s = plant.init_plant();
  s.tanks[0].bulk = {5.0, 12.0, 0.8, 1.0, 0.2, 0.1};
  PlantState d;
  for (auto _ : state) {
    plant.derivatives(s, kInfluent, 1500.0, d);
    benchmark::DoNotOptimize(d.tanks[0].bulk[kSNO2]);
  }
}
BENCHMARK(bm_plant_derivatives);

void bm_plant_step(benchmark::State& state) {
  Biofilter plant(BiofilterConfig{}, KineticParams{});
  PlantState s = plant.init_plant();
  auto influent = [](double) { return kInfluent; };
  const double dt = 30.0 / 86400.0;
  for (auto _ : state) {
    plant.step(s, influent, 1500.0, dt);
    benchmark::DoNotOptimize(s.tanks.back().bulk[kSNO2]);
  }
}
BENCHMARK(bm_plant_step);

void bm_estimator(benchmark::State& state) {
  const double dt = 300.0 / 86400.0, T = 1.0 / 24.0;
  EstimatorBuffer buf;
  double t = 0.0;
  for (int k = 0; k * dt <= 2.0 * T; ++k) {
    t = k * dt;
    buf.push(t, 0.8 + 0.1 * t, 100.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_F(buf, -0.01, T, t));
  }
}
BENCHMARK(bm_estimator);

void bm_short_scenario(benchmark::State& state) {
  ScenarioSpec spec;
  spec.run.duration = 0.125;
  spec.run.warmup = 0.05;
  for (auto _ : state) {
    const RunResult r = run_scenario(spec);
    benchmark::DoNotOptimize(r.rows.back().NO2_out);
  }
}
BENCHMARK(bm_short_scenario)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
