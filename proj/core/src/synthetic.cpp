#include "fts/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fts/error.h"

namespace fts {

namespace {

constexpr double kPi = std::numbers::pi;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

double normal(std::mt19937_64& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

std::string symbol_name(std::size_t i) {
  std::string s = std::to_string(i);
  return "S" + std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
}

}  // namespace

std::vector<double> motif_shape(std::size_t kind, std::size_t length, double amplitude) {
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(length);
    switch (kind) {
      case 0:
        out[i] = std::sin(kPi * u);
        break;
      case 1:
        out[i] = std::sin(2.0 * kPi * u);
        break;
      case 2:
        out[i] = -(1.0 - std::abs(2.0 * u - 1.0));
        break;
      case 3:
        out[i] = std::sin(3.0 * kPi * u) * (1.0 - u);
        break;
      default:
        throw ArgumentError("motif kind " + std::to_string(kind) + " out of range");
    }
    out[i] *= amplitude;
  }
  return out;
}

MotifSeries planted_motif_series(std::size_t length, std::uint64_t seed,
                                 const MotifOptions& options) {
  if (options.l_min == 0 || options.l_min > options.l_max) {
    throw ArgumentError("motif lengths need 0 < l_min <= l_max");
  }
  if (options.kinds == 0 || options.kinds > kMotifKinds) {
    throw ArgumentError("motif kinds must be in [1, 4]");
  }
  std::mt19937_64 rng(seed);
  MotifSeries out;
  while (out.values.size() < length) {
    const std::size_t n = uniform_index(rng, options.l_min, options.l_max);
    const std::size_t kind = uniform_index(rng, 0, options.kinds - 1);
    const double amp = uniform(rng, options.amplitude_min, options.amplitude_max);
    out.boundaries.push_back(out.values.size());
    out.kinds.push_back(kind);
    const auto shape = motif_shape(kind, n, amp);
    out.values.insert(out.values.end(), shape.begin(), shape.end());
  }
  out.values.resize(length);
  for (double& v : out.values) v += options.noise * normal(rng);
  return out;
}

LabeledSegments two_motif_segments(std::size_t per_class, std::size_t l_min,
                                   std::size_t l_max, std::uint64_t seed, double noise) {
  if (l_min < 2 || l_min > l_max) throw ArgumentError("two_motif_segments: bad lengths");
  std::mt19937_64 rng(seed);
  LabeledSegments out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const std::size_t label = i % 2;
    const std::size_t n = uniform_index(rng, l_min, l_max);
    auto shape = motif_shape(label == 0 ? 0 : 2, n, uniform(rng, 0.5, 1.5));
    for (double& v : shape) v += noise * normal(rng);
    out.segments.push_back({start, z_normalize(shape)});
    out.labels.push_back(label);
    start += n;
  }
  return out;
}

std::vector<Date> business_days(const Date& first, std::size_t count) {
  std::vector<Date> out;
  std::chrono::sys_days day{first};
  while (out.size() < count) {
    const std::chrono::weekday wd{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
    day += std::chrono::days{1};
  }
  return out;
}

StockPanel planted_motif_panel(std::uint64_t seed, const MotifPanelOptions& options) {
  if (options.stocks == 0 || options.days < 2) {
    throw ArgumentError("motif panel needs stocks >= 1 and days >= 2");
  }
  MotifOptions clean = options.motifs;
  clean.noise = 0.0;
  const auto schedule = planted_motif_series(options.days, seed, clean);
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  Array3 values(options.stocks, 2, options.days);
  std::vector<std::string> symbols;
  for (std::size_t b = 0; b < options.stocks; ++b) {
    symbols.push_back(symbol_name(b));
    const double scale = uniform(rng, 0.7, 1.3);
    auto signal = values.series(b, 0);
    for (std::size_t t = 0; t < options.days; ++t) {
      signal[t] = scale * schedule.values[t] + options.motifs.noise * normal(rng);
    }
    auto close = values.series(b, 1);
    close[0] = 100.0;
    for (std::size_t t = 1; t < options.days; ++t) {
      const double r = options.return_scale * signal[t] + options.return_noise * normal(rng);
      close[t] = close[t - 1] * std::exp(r);
    }
  }
  return StockPanel(std::move(symbols),
                    business_days(Date{std::chrono::year{2020}, std::chrono::January,
                                       std::chrono::day{1}},
                                  options.days),
                    {"signal", "close"}, std::move(values));
}

namespace {

struct WaveletDraw {
  double a, b1, b2, p0, p1, p2;
};

WaveletDraw draw_wavelet(std::mt19937_64& rng) {
  WaveletDraw d{};
  d.a = uniform(rng, 0.0, 1.0);
  d.b1 = uniform(rng, 0.0, 1.0);
  d.b2 = uniform(rng, 0.0, 1.0);
  d.p0 = uniform(rng, 0.0, 2.0 * kPi);
  d.p1 = uniform(rng, 0.0, 2.0 * kPi);
  d.p2 = uniform(rng, 0.0, 2.0 * kPi);
  return d;
}

double wavelet_value(const WaveletDraw& d, const WaveletFixtureOptions& o, double t) {
  return d.a * std::sin(2.0 * kPi * o.signal_frequency * t + d.p0) +
         d.b1 * std::sin(2.0 * kPi * o.distractor_low * t + d.p1) +
         d.b2 * std::sin(2.0 * kPi * o.distractor_high * t + d.p2);
}

}  // namespace

Dataset planted_wavelet_dataset(std::size_t samples, std::uint64_t seed,
                                const WaveletFixtureOptions& options) {
  if (options.patch_length == 0 || options.patches == 0) {
    throw ArgumentError("wavelet fixture needs positive patch length and count");
  }
  std::mt19937_64 rng(seed);
  const std::size_t length = options.patch_length * options.patches;
  std::vector<ExtractionPoint> points;
  for (std::size_t k = 0; k < options.patches; ++k) {
    points.push_back({k * options.patch_length, PatchOrigin::stride});
  }
  Dataset out;
  out.num_features = 1;
  std::vector<double> x(length);
  for (std::size_t n = 0; n < samples; ++n) {
    const auto d = draw_wavelet(rng);
    for (std::size_t t = 0; t < length; ++t) {
      x[t] = wavelet_value(d, options, static_cast<double>(t)) + options.noise * normal(rng);
    }
    WindowSample sample;
    sample.stock = n;
    sample.day = length - 1;
    sample.target = d.a * d.a - 1.0 / 3.0;
    sample.raw_return = sample.target;
    sample.channels.push_back({0, extract_patches(x, points, options.patch_length)});
    out.samples.push_back(std::move(sample));
  }
  return out;
}

StockPanel planted_wavelet_panel(std::uint64_t seed, const WaveletPanelOptions& options) {
  if (options.stocks == 0 || options.days < 2 || options.block == 0) {
    throw ArgumentError("wavelet panel needs stocks >= 1, days >= 2 and block >= 1");
  }
  std::mt19937_64 rng(seed);
  const auto& fx = options.fixture;
  Array3 values(options.stocks, 2, options.days);
  std::vector<std::string> symbols;
  std::vector<double> a2(options.days);
  for (std::size_t b = 0; b < options.stocks; ++b) {
    symbols.push_back(symbol_name(b));
    auto signal = values.series(b, 0);
    WaveletDraw d{};
    for (std::size_t t = 0; t < options.days; ++t) {
      if (t % options.block == 0) d = draw_wavelet(rng);
      signal[t] = wavelet_value(d, fx, static_cast<double>(t)) + fx.noise * normal(rng);
      a2[t] = d.a * d.a;
    }
    auto close = values.series(b, 1);
    close[0] = 100.0;
    double window_sum = 0.0;
    for (std::size_t t = 0; t + 1 < options.days; ++t) {
      window_sum += a2[t];
      if (t >= fx.patch_length) window_sum -= a2[t - fx.patch_length];
      const double span = static_cast<double>(std::min(t + 1, fx.patch_length));
      const double r = options.beta * (window_sum / span - 1.0 / 3.0) +
                       options.return_noise * normal(rng);
      close[t + 1] = close[t] * (1.0 + r);
    }
  }
  return StockPanel(std::move(symbols),
                    business_days(Date{std::chrono::year{2020}, std::chrono::January,
                                       std::chrono::day{1}},
                                  options.days),
                    {"signal", "close"}, std::move(values));
}

}  // namespace fts
