#include <benchmark/benchmark.h>

#include <vector>

#include "lerkit/evaluate.hpp"
#include "lerkit/meta.hpp"
#include "lerkit/recovery.hpp"
#include "lerkit/verify.hpp"

using namespace lerkit;

namespace {

WeightFunction decaying(std::size_t T) {
  std::vector<double> w(T);
  for (std::size_t i = 0; i < T; ++i) w[i] = 12.0 / static_cast<double>(i + 1);
  return WeightFunction(std::move(w));
}

void BM_ScoreMask(benchmark::State& state) {
  const auto w = decaying(static_cast<std::size_t>(state.range(0)));
  RandomSource src(1);
  std::vector<std::uint64_t> masks(1024);
  for (auto& m : masks) m = src();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(recovery::score_mask(masks[i++ & 1023], w.values()));
}
BENCHMARK(BM_ScoreMask)->Arg(8)->Arg(30)->Arg(64);

void BM_RecoveryStep(benchmark::State& state) {
  RecoveryConfig config;
  config.weights = decaying(30);
  config.threshold = 1e9;
  config.provenance.T = 30;
  recovery::SlidingWindow window(30);
  recovery::ModeState mode;
  RandomSource src(2);
  for (auto _ : state) {
    recovery::step_in_place(mode, window, {"", static_cast<std::uint8_t>(src() & 1U), 0.0}, config);
    if (mode.score_history.size() > 4096) mode.score_history.clear();
  }
}
BENCHMARK(BM_RecoveryStep);

void BM_DetectionSteps(benchmark::State& state) {
  const auto w = decaying(30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        meta::estimate_detection_steps(w, 20.0, 0.3, static_cast<std::size_t>(state.range(0)),
                                       RandomSource(3)));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DetectionSteps)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_OptimalThreshold(benchmark::State& state) {
  const auto w = decaying(30);
  for (auto _ : state) {
    benchmark::DoNotOptimize(meta::optimal_threshold(w, 0.3, 10.0, 10'000, RandomSource(4)));
  }
}
BENCHMARK(BM_OptimalThreshold)->Unit(benchmark::kMillisecond);

void BM_ExactExpectedSteps(benchmark::State& state) {
  const auto w = decaying(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate::exact_expected_steps(w, 10.0, 0.3));
}
BENCHMARK(BM_ExactExpectedSteps)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ExactQual(benchmark::State& state) {
  const auto w = decaying(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate::exact_qual(w, 10.0, 0.3));
}
BENCHMARK(BM_ExactQual)->Arg(12)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_RangingExchange(benchmark::State& state) {
  const auto a = verify::Entity::at("A", {0, 0});
  const auto b = verify::Entity::at("B", {300, 0});
  RandomSource src(5);
  for (auto _ : state) benchmark::DoNotOptimize(verify::run_exchange(a, b, {}, {}, src));
}
BENCHMARK(BM_RangingExchange);

}  // namespace

BENCHMARK_MAIN();
