#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "fts/dtw.h"
#include "fts/sipr.h"
#include "fts/synthetic.h"

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

void BM_Dtw(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 1), y = noise(n, 2);
  fts::DtwOptions o;
  o.weight_mode = state.range(1) ? fts::WeightMode::volatility : fts::WeightMode::uniform;
  for (auto _ : state) benchmark::DoNotOptimize(fts::dtw_distance(x, y, o).distance);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dtw)->ArgsProduct({{16, 32, 64, 128}, {0, 1}});

void BM_DtwWithPath(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = noise(n, 1), y = noise(n, 2);
  fts::DtwOptions o;
  o.with_path = true;
  for (auto _ : state) benchmark::DoNotOptimize(fts::dtw_distance(x, y, o).path->size());
}
BENCHMARK(BM_DtwWithPath)->Arg(32)->Arg(128);

void BM_SegmentSeries(benchmark::State& state) {
  const auto series = fts::planted_motif_series(static_cast<std::size_t>(state.range(0)), 3);
  fts::ClusterConfig cc;
  cc.k = 4;
  cc.max_iter = 3;
  cc.dba_iterations = 2;
  cc.stride = 16;
  cc.dtw.weight_mode = fts::WeightMode::volatility;
  const auto lib = fts::kmeans_cluster(fts::harvest_segments(series.values, 16, 32, 16), cc);
  for (auto _ : state) benchmark::DoNotOptimize(fts::segment_series(series.values, lib).boundaries.size());
}
BENCHMARK(BM_SegmentSeries)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
