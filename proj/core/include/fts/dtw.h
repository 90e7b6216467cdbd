#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace fts {

enum class LocalMetric { absolute, squared };
enum class WeightMode { uniform, volatility };

struct DtwOptions {
  LocalMetric local_metric = LocalMetric::absolute;
  /// Sakoe-Chiba radius in steps; must be >= |n - m| when set.
  std::optional<std::size_t> band_radius;
  WeightMode weight_mode = WeightMode::uniform;
  /// Trailing window for volatility weights (weight_mode == volatility).
  std::size_t volatility_window = 4;
  /// Weight local cost by (w_x[i] + w_y[j]) / 2 instead of w_x[i] alone.
  bool symmetric_weights = false;
  /// Keep the full cost table and backtrack the warping path.
  bool with_path = false;
};

/// Warping path entries are 0-based (i, j) pairs from (0, 0) to (n-1, m-1).
using WarpingPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct DtwResult {
  double distance = 0.0;
  /// Number of cells on the optimal path under the tie-breaking rule (diagonal,
  /// then up, then left); always computed, with or without `path`.
  std::size_t path_length = 0;
  std::optional<WarpingPath> path;
};

double local_cost(double a, double b, LocalMetric metric) noexcept;

/// D(i,j) = d(x_i, y_j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1)), D(0,0) = 0.
/// With weight_mode == volatility, x is the weighted (query) side.
DtwResult dtw_distance(std::span<const double> x, std::span<const double> y,
                       const DtwOptions& opts = {});

/// Per-point weights w_i = (sigma_i + eps) / mean(sigma + eps), sigma_i the
/// population std over the trailing `window` points. Points before the first
/// full window reuse that window's sigma.
std::vector<double> volatility_weights(std::span<const double> segment,
                                       std::size_t window, double eps = 1e-8);

/// Same recurrence with local cost wx_i * d(x_i, y_j). When
/// opts.symmetric_weights is set, `wy` must be supplied.
DtwResult weighted_dtw_distance(std::span<const double> x,
                                std::span<const double> y,
                                std::span<const double> wx,
                                const DtwOptions& opts = {},
                                std::span<const double> wy = {});

/// Row-major square matrix.
struct DistanceMatrix {
  std::size_t size = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const {
    return values[i * size + j];
  }
};

DistanceMatrix pairwise_distances(const std::vector<std::vector<double>>& segments,
                                  const DtwOptions& opts = {});

}  // namespace fts
