#include <numeric>
#include <vector>

#include <benchmark/benchmark.h>

#include "fts/predictor.h"
#include "fts/synthetic.h"

namespace {

void BM_Forward(benchmark::State& state) {
  const fts::PredictorDims dims{16, 2, static_cast<std::size_t>(state.range(0))};
  const auto params = fts::PredictorParams::random(dims, 1);
  const auto data = fts::planted_wavelet_dataset(1, 2, {.patches = static_cast<std::size_t>(state.range(1))});
  const auto& patches = data.samples[0].channels[0].patches;
  const auto tokens = fts::build_tokens(patches, fts::init_filters(fts::WaveletBasis::db4, 8), 2);
  const auto desc = fts::build_descriptors(patches);
  for (auto _ : state) benchmark::DoNotOptimize(fts::forward(tokens, desc, params).scores.data());
}
BENCHMARK(BM_Forward)->Args({16, 7})->Args({32, 7})->Args({16, 15});

void BM_BatchGradient(benchmark::State& state) {
  const auto data = fts::planted_wavelet_dataset(static_cast<std::size_t>(state.range(0)), 3);
  const auto bank = fts::FilterBank::make(fts::WaveletBasis::db4, 8, 2, 1, true);
  const auto params = fts::PredictorParams::random({16, 2, 16}, 4);
  std::vector<std::size_t> batch(data.samples.size());
  std::iota(batch.begin(), batch.end(), 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fts::batch_gradient(data, batch, params, bank, fts::LossMode::joint, 0.0).objective.loss);
  }
}
BENCHMARK(BM_BatchGradient)->Arg(32)->Unit(benchmark::kMicrosecond);

}  // namespace
