#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rawsea/coregister.hpp"
#include "rawsea/detector.hpp"
#include "rawsea/hungarian.hpp"
#include "rawsea/synthetic.hpp"
#include "rawsea/threshold.hpp"

using namespace rawsea;

namespace {

void BM_Hungarian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 2000.0);
  std::vector<double> c(n * n);
  for (auto& v : c) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(ais::hungarian(c, n, n));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(8, 256)->Complexity();

void BM_Otsu(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> sea(600, 40);
  std::vector<DN> px(std::size_t(side) * side);
  for (auto& v : px) v = DN(std::clamp(sea(rng), 0.0, 4095.0));
  for (auto _ : state) benchmark::DoNotOptimize(label::otsu_threshold(label::Histogram::of(px)));
}
BENCHMARK(BM_Otsu)->Arg(16)->Arg(64)->Arg(256);

void BM_EstimateShift(benchmark::State& state) {
  synth::SceneConfig cfg;
  cfg.width = cfg.height = static_cast<int>(state.range(0));
  cfg.bands = {"B2", "B3"};
  cfg.displacement = {{"B3", {3, -2}}};
  const auto scene = synth::make_scene(3, cfg, "bench");
  const auto& ref = scene.granule.band("B2");
  const auto& mov = scene.granule.band("B3");
  for (auto _ : state) benchmark::DoNotOptimize(coreg::estimate_shift(ref, mov, 10));
}
BENCHMARK(BM_EstimateShift)->Arg(128)->Arg(384)->Unit(benchmark::kMillisecond);

void BM_Detect(benchmark::State& state) {
  synth::SceneConfig cfg;
  cfg.width = cfg.height = static_cast<int>(state.range(0));
  cfg.bands = {"B2"};
  const auto scene = synth::make_scene(4, cfg, "bench");
  const auto& band = scene.granule.band("B2");
  for (auto _ : state) benchmark::DoNotOptimize(detect::detect(band));
}
BENCHMARK(BM_Detect)->Arg(384)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
