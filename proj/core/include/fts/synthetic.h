#pragma once

// Seeded synthetic fixtures with planted structure.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fts/panel.h"
#include "fts/predictor.h"
#include "fts/sipr.h"

namespace fts {

/// Shape families: 0 half-sine bump, 1 full sine, 2 inverted tent,
/// 3 damped three-half sine.
inline constexpr std::size_t kMotifKinds = 4;
std::vector<double> motif_shape(std::size_t kind, std::size_t length, double amplitude);

struct MotifSeries {
  std::vector<double> values;
  std::vector<std::size_t> boundaries;  // start of every planted motif
  std::vector<std::size_t> kinds;
};

struct MotifOptions {
  std::size_t l_min = 16;
  std::size_t l_max = 32;
  std::size_t kinds = kMotifKinds;  // motifs drawn from the first `kinds` shapes
  double amplitude_min = 0.5;
  double amplitude_max = 1.5;
  double noise = 0.05;
};

/// Back-to-back motifs of random kind, length and amplitude plus Gaussian noise.
MotifSeries planted_motif_series(std::size_t length, std::uint64_t seed,
                                 const MotifOptions& options = {});

struct LabeledSegments {
  std::vector<Segment> segments;
  std::vector<std::size_t> labels;
};

/// `per_class` segments of each of two clearly distinct shapes (half-sine
/// bump and inverted tent), random lengths in [l_min, l_max], z-normalized.
LabeledSegments two_motif_segments(std::size_t per_class, std::size_t l_min,
                                   std::size_t l_max, std::uint64_t seed,
                                   double noise = 0.05);

/// Weekday calendar starting at `first`.
std::vector<Date> business_days(const Date& first, std::size_t count);

/// Stocks share one motif schedule with per-stock amplitude scaling and noise.
/// Features: `signal` (the motif series) and `close`, whose next-day log
/// return is `return_scale` times the next signal value plus noise.
struct MotifPanelOptions {
  std::size_t stocks = 8;
  std::size_t days = 400;
  MotifOptions motifs;
  double return_scale = 0.01;
  double return_noise = 0.002;
};
StockPanel planted_motif_panel(std::uint64_t seed, const MotifPanelOptions& options = {});

/// Each sample is one channel of `patches` back-to-back patches of
/// a sin(2 pi f1 t) + b1 sin(2 pi f2 t) + b2 sin(2 pi f3 t) + noise with random
/// phases and a, b1, b2 ~ U(0, 1). The target is a^2 - 1/3, so it depends on
/// the energy in one frequency band only.
struct WaveletFixtureOptions {
  std::size_t patch_length = 16;
  std::size_t patches = 4;
  double noise = 0.3;
  double signal_frequency = 0.3;
  double distractor_low = 0.1;
  double distractor_high = 0.42;
};
Dataset planted_wavelet_dataset(std::size_t samples, std::uint64_t seed,
                                const WaveletFixtureOptions& options = {});

/// Panel form of the same fixture: features `signal` and `close`. The band
/// amplitudes redraw every `block` days; the next-day return is
/// beta * (mean of a^2 over the last patch_length days - 1/3) + noise.
struct WaveletPanelOptions {
  std::size_t stocks = 10;
  std::size_t days = 320;
  std::size_t block = 16;
  WaveletFixtureOptions fixture;
  double beta = 0.02;
  double return_noise = 0.002;
};
StockPanel planted_wavelet_panel(std::uint64_t seed, const WaveletPanelOptions& options = {});

}  // namespace fts
