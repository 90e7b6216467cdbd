#include "fts/dtw.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fts/error.h"

namespace fts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(std::span<const double> x, std::span<const double> y,
                  const DtwOptions& opts) {
  if (x.empty() || y.empty()) {
    throw ArgumentError("dtw: empty sequence");
  }
  if (opts.band_radius) {
    const std::size_t gap = x.size() > y.size() ? x.size() - y.size()
                                                : y.size() - x.size();
    if (*opts.band_radius < gap) {
      throw ArgumentError("dtw: band radius " +
                          std::to_string(*opts.band_radius) +
                          " infeasible for lengths " + std::to_string(x.size()) +
                          " and " + std::to_string(y.size()));
    }
  }
}

bool in_band(std::size_t i, std::size_t j, const std::optional<std::size_t>& r) {
  if (!r) return true;
  return (i > j ? i - j : j - i) <= *r;
}

// `weight(i, j)` scales the local cost of cell (i, j), 0-based.
template <typename Weight>
DtwResult run_dtw(std::span<const double> x, std::span<const double> y,
                  const DtwOptions& opts, Weight weight) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const auto& band = opts.band_radius;

  if (!opts.with_path) {
    // Path lengths follow the same predecessor choice as the backtrace.
    std::vector<double> prev(m + 1, kInf);
    std::vector<double> curr(m + 1, kInf);
    std::vector<std::size_t> prev_len(m + 1, 0);
    std::vector<std::size_t> curr_len(m + 1, 0);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      // Columns inside the band for row i (1-based).
      std::size_t j_lo = 1;
      std::size_t j_hi = m;
      if (band) {
        j_lo = i > *band + 1 ? i - *band : 1;
        j_hi = std::min(m, i + *band);
      }
      std::fill(curr.begin(), curr.begin() + static_cast<std::ptrdiff_t>(j_lo), kInf);
      const double xi = x[i - 1];
      double left = curr[j_lo - 1];
      std::size_t left_len = curr_len[j_lo - 1];
      for (std::size_t j = j_lo; j <= j_hi; ++j) {
        const double diag = prev[j - 1];
        const double up = prev[j];
        // All-ones masks select the predecessor length without branching.
        const std::size_t diag_mask = 0 - static_cast<std::size_t>((diag <= up) & (diag <= left));
        const std::size_t up_mask = 0 - static_cast<std::size_t>(up <= left);
        const double best = std::min(std::min(diag, up), left);
        const std::size_t up_or_left = (prev_len[j] & up_mask) | (left_len & ~up_mask);
        left_len = ((prev_len[j - 1] & diag_mask) | (up_or_left & ~diag_mask)) + 1;
        left = weight(i - 1, j - 1) * local_cost(xi, y[j - 1], opts.local_metric) + best;
        curr[j] = left;
        curr_len[j] = left_len;
      }
      std::fill(curr.begin() + static_cast<std::ptrdiff_t>(j_hi) + 1, curr.end(), kInf);
      std::swap(prev, curr);
      std::swap(prev_len, curr_len);
    }
    return {prev[m], prev_len[m], std::nullopt};
  }

  const std::size_t w = m + 1;
  std::vector<double> table((n + 1) * w, kInf);
  table[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (!in_band(i - 1, j - 1, band)) continue;
      const double best = std::min({table[(i - 1) * w + j - 1],
                                    table[(i - 1) * w + j],
                                    table[i * w + j - 1]});
      table[i * w + j] = weight(i - 1, j - 1) *
                             local_cost(x[i - 1], y[j - 1], opts.local_metric) +
                         best;
    }
  }

  // Backtrace; ties prefer the diagonal, then up (i-1), then left (j-1).
  WarpingPath path;
  std::size_t i = n;
  std::size_t j = m;
  path.emplace_back(i - 1, j - 1);
  while (i > 1 || j > 1) {
    const double diag = table[(i - 1) * w + j - 1];
    const double up = table[(i - 1) * w + j];
    const double left = table[i * w + j - 1];
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    path.emplace_back(i - 1, j - 1);
  }
  std::reverse(path.begin(), path.end());
  const std::size_t length = path.size();
  return {table[n * w + m], length, std::move(path)};
}

}  // namespace

double local_cost(double a, double b, LocalMetric metric) noexcept {
  const double diff = a - b;
  return metric == LocalMetric::absolute ? std::fabs(diff) : diff * diff;
}

DtwResult dtw_distance(std::span<const double> x, std::span<const double> y,
                       const DtwOptions& opts) {
  check_inputs(x, y, opts);
  if (opts.weight_mode == WeightMode::volatility) {
    const auto wx = volatility_weights(x, opts.volatility_window);
    if (opts.symmetric_weights) {
      const auto wy = volatility_weights(y, opts.volatility_window);
      return weighted_dtw_distance(x, y, wx, opts, wy);
    }
    return weighted_dtw_distance(x, y, wx, opts);
  }
  return run_dtw(x, y, opts, [](std::size_t, std::size_t) { return 1.0; });
}

std::vector<double> volatility_weights(std::span<const double> segment,
                                       std::size_t window, double eps) {
  if (window < 2) throw ArgumentError("volatility window must be >= 2");
  if (segment.size() < window) {
    throw ArgumentError("volatility window " + std::to_string(window) +
                        " longer than segment of " +
                        std::to_string(segment.size()));
  }
  const std::size_t n = segment.size();
  std::vector<double> sigma(n, 0.0);
  for (std::size_t end = window; end <= n; ++end) {
    double mean = 0.0;
    for (std::size_t k = end - window; k < end; ++k) mean += segment[k];
    mean /= static_cast<double>(window);
    double var = 0.0;
    for (std::size_t k = end - window; k < end; ++k) {
      var += (segment[k] - mean) * (segment[k] - mean);
    }
    sigma[end - 1] = std::sqrt(var / static_cast<double>(window));
  }
  for (std::size_t i = 0; i + 1 < window; ++i) sigma[i] = sigma[window - 1];

  const auto [lo, hi] = std::minmax_element(sigma.begin(), sigma.end());
  if (*lo == *hi) return std::vector<double>(n, 1.0);

  double mean = 0.0;
  for (double s : sigma) mean += s + eps;
  mean /= static_cast<double>(n);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = (sigma[i] + eps) / mean;
  return weights;
}

DtwResult weighted_dtw_distance(std::span<const double> x,
                                std::span<const double> y,
                                std::span<const double> wx,
                                const DtwOptions& opts,
                                std::span<const double> wy) {
  check_inputs(x, y, opts);
  if (wx.size() != x.size()) {
    throw ArgumentError("dtw: weight length " + std::to_string(wx.size()) +
                        " != sequence length " + std::to_string(x.size()));
  }
  for (double v : wx) {
    if (!(v > 0.0)) throw ArgumentError("dtw: weights must be positive");
  }
  if (opts.symmetric_weights) {
    if (wy.size() != y.size()) {
      throw ArgumentError("dtw: symmetric weighting needs weights for y");
    }
    for (double v : wy) {
      if (!(v > 0.0)) throw ArgumentError("dtw: weights must be positive");
    }
    return run_dtw(x, y, opts, [&](std::size_t i, std::size_t j) {
      return 0.5 * (wx[i] + wy[j]);
    });
  }
  return run_dtw(x, y, opts, [&](std::size_t i, std::size_t) { return wx[i]; });
}

DistanceMatrix pairwise_distances(const std::vector<std::vector<double>>& segments,
                                  const DtwOptions& opts) {
  if (segments.empty()) throw ArgumentError("pairwise_distances: no segments");
  const std::size_t n = segments.size();
  DistanceMatrix out{n, std::vector<double>(n * n, 0.0)};
  DtwOptions local = opts;
  local.with_path = false;
  const bool symmetric = opts.weight_mode == WeightMode::uniform ||
                         opts.symmetric_weights;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = symmetric ? i + 1 : 0; j < n; ++j) {
      if (i == j) continue;
      try {
        const double d = dtw_distance(segments[i], segments[j], local).distance;
        out.values[i * n + j] = d;
        if (symmetric) out.values[j * n + i] = d;
      } catch (const ArgumentError& e) {
        throw ArgumentError("pair (" + std::to_string(i) + ", " +
                            std::to_string(j) + "): " + e.what());
      }
    }
  }
  return out;
}

}  // namespace fts
