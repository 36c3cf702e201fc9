#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "samplation/generation.hpp"
#include "samplation/model.hpp"
#include "samplation/pipeline.hpp"
#include "samplation/sampling.hpp"

namespace {

using namespace samplation;

Dataset make_data(std::size_t n, std::vector<double> prevalence, Seed seed) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.group_prevalence = std::move(prevalence);
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

void BM_ReservoirSample(benchmark::State& state) {
  std::vector<int> stream(static_cast<std::size_t>(state.range(0)));
  std::iota(stream.begin(), stream.end(), 0);
  Seed seed = 0;
  for (auto _ : state) {
    auto out = reservoir_sample(stream, 75, seed++);
    benchmark::DoNotOptimize(out.items.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReservoirSample)->Arg(1600)->Arg(16000);

void BM_Knn(benchmark::State& state) {
  const Dataset ds = make_data(static_cast<std::size_t>(state.range(0)), {1.0}, 1);
  std::vector<std::vector<double>> pts;
  for (const auto& inst : ds.instances()) pts.push_back(inst.features);
  std::size_t q = 0;
  for (auto _ : state) {
    auto nb = knn(pts, q++ % pts.size(), 5);
    benchmark::DoNotOptimize(nb.data());
  }
}
BENCHMARK(BM_Knn)->Arg(200)->Arg(2000);

void BM_SmoteReserve(benchmark::State& state) {
  const Dataset ds = make_data(200, {1.0}, 2);
  Seed seed = 0;
  for (auto _ : state) {
    auto out = smote_generate(ds.instances(), static_cast<std::size_t>(state.range(0)), 5, seed++);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_SmoteReserve)->Arg(1600);

void BM_Pretrain(benchmark::State& state) {
  const Dataset train = make_data(2000, {0.9, 0.1}, 3);
  TrainConfig cfg;
  for (auto _ : state) {
    auto m = pretrain(train, cfg);
    benchmark::DoNotOptimize(m.weights.data());
  }
}
BENCHMARK(BM_Pretrain)->Unit(benchmark::kMillisecond);

void BM_SamplateTrial(benchmark::State& state) {
  const Dataset train = make_data(2000, {0.9, 0.1}, 4);
  const Dataset test = make_data(1000, {0.5, 0.5}, 5);
  const Model m = pretrain(train, TrainConfig{});
  SamplationConfig cfg;
  cfg.tau = static_cast<std::size_t>(state.range(0));
  const auto reserves = build_reserves(train, cfg.reserve_size, cfg.k, 6);
  Seed seed = 0;
  for (auto _ : state) {
    auto row = samplate(m, reserves, test, cfg, seed++);
    benchmark::DoNotOptimize(row.ratio_after.value);
  }
}
BENCHMARK(BM_SamplateTrial)->Arg(75)->Arg(750)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
