#pragma once

// Scale-invariant pattern recognition: variable-length segments are
// z-normalized, clustered under DTW into K shape centroids, and the centroids
// then drive a greedy left-to-right segmentation of any series.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fts/dtw.h"

namespace fts {

struct Segment {
  std::size_t start = 0;
  std::vector<double> values;  // z-normalized
};

struct ClusterConfig {
  std::size_t k = 8;
  std::size_t l_min = 16;
  std::size_t l_max = 32;
  std::size_t stride = 16;
  std::size_t max_iter = 50;
  double tol = 1e-6;
  std::size_t dba_iterations = 10;
  std::uint64_t seed = 7;
  DtwOptions dtw;
};

struct PatternLibrary {
  std::vector<std::vector<double>> centroids;
  std::size_t k = 0;
  std::size_t l_min = 0;
  std::size_t l_max = 0;
  double inertia = 0.0;
  DtwOptions options;
  /// Inertia after initial assignment and after every iteration.
  std::vector<double> inertia_trace;
  /// Cluster index of each training segment at the final assignment.
  std::vector<std::size_t> assignments;
};

struct Segmentation {
  std::vector<std::size_t> boundaries;
  std::vector<std::size_t> lengths;
  std::vector<std::size_t> assignments;
  std::vector<double> distances;
  /// True when a tail shorter than l_min was folded into the last segment.
  /// The recorded distance of that segment is the one of its chosen candidate.
  bool remainder_merged = false;
};

/// (x - mean) / max(std, floor) with population std.
std::vector<double> z_normalize(std::span<const double> values,
                                double std_floor = 1e-8);

/// Linear-interpolation resample to `length` points (endpoints preserved).
std::vector<double> resample(std::span<const double> values, std::size_t length);

/// DTW distance divided by warping-path length. The weighting in `opts`
/// applies with `query` on the weighted side.
double pattern_distance(std::span<const double> query,
                        std::span<const double> centroid,
                        const DtwOptions& opts);

/// Every length in [l_min, l_max] at starts 0, stride, 2*stride, ...;
/// ordered by start, then length.
std::vector<Segment> harvest_segments(std::span<const double> series,
                                      std::size_t l_min, std::size_t l_max,
                                      std::size_t stride);

/// Indices of k distinct segments. The first is a seeded uniform draw among
/// segments of the modal length; each next one maximizes the minimum
/// volatility-weighted pattern distance to those already chosen.
std::vector<std::size_t> farthest_first_init(const std::vector<Segment>& segments,
                                             std::size_t k,
                                             const DtwOptions& opts,
                                             std::uint64_t seed);

struct DbaResult {
  std::vector<double> centroid;
  /// Sum of DTW distances from members to the centroid: entry 0 for the
  /// resampled reference, then one entry per completed iteration.
  std::vector<double> cost_trace;
};

/// DTW barycenter averaging. Each iteration aligns every member to the current
/// centroid and replaces each centroid point by the minimizer of the local
/// metric over its aligned values (median for absolute, mean for squared).
DbaResult dba_centroid(const std::vector<std::vector<double>>& members,
                       std::size_t target_length,
                       std::span<const double> reference,
                       std::size_t iterations,
                       LocalMetric metric = LocalMetric::absolute);

PatternLibrary kmeans_cluster(const std::vector<Segment>& segments,
                              const ClusterConfig& config);

/// Greedy scan: at each start t choose the (l, p) minimizing the pattern
/// distance of z_normalize(series[t, t+l)) to centroid p; ties take the
/// smallest l, then the smallest p.
Segmentation segment_series(std::span<const double> series,
                            const PatternLibrary& library);

}  // namespace fts
