#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "fts/swt.h"

namespace {

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

void BM_SwtForward(benchmark::State& state) {
  const auto x = noise(static_cast<std::size_t>(state.range(0)));
  const auto f = fts::init_filters(fts::WaveletBasis::db4, 8);
  const auto levels = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fts::swt_forward(x, f, levels).approx.data());
}
BENCHMARK(BM_SwtForward)->Args({16, 2})->Args({64, 3})->Args({256, 4});

void BM_SwtBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto levels = static_cast<std::size_t>(state.range(1));
  const auto x = noise(n);
  const auto f = fts::init_filters(fts::WaveletBasis::db4, 8);
  auto u = fts::SwtCoefficients::zeros(n, levels);
  for (auto& d : u.detail) d = noise(n);
  u.approx = noise(n);
  for (auto _ : state) benchmark::DoNotOptimize(fts::swt_backward(x, f, levels, u).grad_h.data());
}
BENCHMARK(BM_SwtBackward)->Args({16, 2})->Args({64, 3});

void BM_SwtRoundTrip(benchmark::State& state) {
  const auto x = noise(128);
  const auto f = fts::init_filters(fts::WaveletBasis::haar, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fts::swt_inverse(fts::swt_forward(x, f, 3), f).data());
}
BENCHMARK(BM_SwtRoundTrip);

}  // namespace
