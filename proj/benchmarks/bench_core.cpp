#include <benchmark/benchmark.h>

#include "whichpath/measurement.hpp"
#include "whichpath/optics.hpp"
#include "whichpath/shelving.hpp"
#include "whichpath/stats.hpp"

using namespace whichpath;

static void BM_SingleHoleAmplitude(benchmark::State& state) {
  const auto geometry = SlitGeometry::default_geometry();
  for (auto _ : state) benchmark::DoNotOptimize(single_hole_amplitude(geometry, Hole::A));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(geometry.size()));
}
BENCHMARK(BM_SingleHoleAmplitude);

static void BM_FresnelOracle(benchmark::State& state) {
  const auto geometry = SlitGeometry::default_geometry();
  const Hole holes[] = {Hole::A};
  QuadratureOptions options;
  options.panels = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fresnel_oracle(geometry, holes, options));
}
BENCHMARK(BM_FresnelOracle)->Arg(4000)->Arg(10000)->Unit(benchmark::kMillisecond);

static void BM_SamplePositions(benchmark::State& state) {
  const auto setup = TwoHoleSetup::prepare(SlitGeometry::default_geometry());
  const InverseCdfSampler sampler(setup->interference_density());
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(sampler.draw(rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SamplePositions);

static void BM_ApplyMeasurement(benchmark::State& state) {
  const auto setup = TwoHoleSetup::prepare(SlitGeometry::default_geometry());
  const auto initial = ConditionalState::coherent_superposition(setup);
  const IlluminationConfig config{IlluminationMode::HoleAOnly, true, 1.0};
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(apply_measurement(initial, config, rng));
}
BENCHMARK(BM_ApplyMeasurement);

static void BM_StreamPhotonsToDetector(benchmark::State& state) {
  const VSystemRates rates;
  Rng rng(3);
  const auto trajectory = simulate_trajectory(rates, 10.0, rng);
  std::int64_t photons = 0;
  for (auto _ : state) {
    DarkIntervalDetector detector(kDefaultDarkThreshold);
    Rng stream(4);
    stream_photons(trajectory, rates, stream, [&](double t) {
      detector.observe(t);
      ++photons;
    });
    benchmark::DoNotOptimize(detector.finish(trajectory.total_time));
  }
  state.SetItemsProcessed(photons);
}
BENCHMARK(BM_StreamPhotonsToDetector)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
