#include "fts/sipr.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>

#include "fts/error.h"

namespace fts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double value_minimizer(std::vector<double>& values, LocalMetric metric) {
  if (metric == LocalMetric::squared) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double total_dtw(const std::vector<std::vector<double>>& members,
                 std::span<const double> centroid, LocalMetric metric) {
  DtwOptions opts;
  opts.local_metric = metric;
  double total = 0.0;
  for (const auto& member : members) {
    total += dtw_distance(centroid, member, opts).distance;
  }
  return total;
}

struct Assignment {
  std::vector<std::size_t> cluster;
  std::vector<double> distance;
  double inertia = 0.0;
};

Assignment assign(const std::vector<Segment>& segments,
                  const std::vector<std::vector<double>>& centroids,
                  const DtwOptions& opts) {
  Assignment out;
  out.cluster.resize(segments.size());
  out.distance.resize(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = pattern_distance(segments[s].values, centroids[c], opts);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    out.cluster[s] = arg;
    out.distance[s] = best;
    out.inertia += best;
  }
  return out;
}

double cluster_cost(const std::vector<Segment>& segments,
                    const std::vector<std::size_t>& members,
                    std::span<const double> centroid, const DtwOptions& opts) {
  double total = 0.0;
  for (std::size_t s : members) {
    total += pattern_distance(segments[s].values, centroid, opts);
  }
  return total;
}

}  // namespace

std::vector<double> z_normalize(std::span<const double> values,
                                double std_floor) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  const double n = static_cast<double>(out.size());
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : out) var += (v - mean) * (v - mean);
  const double sd = std::max(std::sqrt(var / n), std_floor);
  for (double& v : out) v = (v - mean) / sd;
  return out;
}

std::vector<double> resample(std::span<const double> values, std::size_t length) {
  if (values.empty() || length == 0) {
    throw ArgumentError("resample: empty input or target length");
  }
  if (values.size() == length) return {values.begin(), values.end()};
  std::vector<double> out(length);
  if (length == 1) {
    out[0] = values[0];
    return out;
  }
  if (values.size() == 1) return std::vector<double>(length, values[0]);
  const double scale = static_cast<double>(values.size() - 1) /
                       static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) {
    const double pos = static_cast<double>(i) * scale;
    const std::size_t lo = std::min(static_cast<std::size_t>(pos), values.size() - 2);
    const double frac = pos - static_cast<double>(lo);
    out[i] = values[lo] * (1.0 - frac) + values[lo + 1] * frac;
  }
  return out;
}

double pattern_distance(std::span<const double> query,
                        std::span<const double> centroid,
                        const DtwOptions& opts) {
  DtwOptions local = opts;
  local.with_path = false;
  if (local.weight_mode == WeightMode::volatility) {
    local.volatility_window =
        std::clamp<std::size_t>(local.volatility_window, 2,
                                std::min(query.size(), centroid.size()));
  }
  const DtwResult r = dtw_distance(query, centroid, local);
  return r.distance / static_cast<double>(r.path_length);
}

std::vector<Segment> harvest_segments(std::span<const double> series,
                                      std::size_t l_min, std::size_t l_max,
                                      std::size_t stride) {
  if (l_min == 0 || stride == 0) {
    throw ArgumentError("harvest: l_min and stride must be positive");
  }
  if (l_min > l_max) {
    throw ArgumentError("harvest: l_min " + std::to_string(l_min) +
                        " > l_max " + std::to_string(l_max));
  }
  if (l_max > series.size()) {
    throw ArgumentError("harvest: l_max " + std::to_string(l_max) +
                        " exceeds series length " +
                        std::to_string(series.size()));
  }
  std::vector<Segment> out;
  for (std::size_t start = 0; start + l_min <= series.size(); start += stride) {
    for (std::size_t len = l_min; len <= l_max && start + len <= series.size();
         ++len) {
      out.push_back({start, z_normalize(series.subspan(start, len))});
    }
  }
  return out;
}

std::vector<std::size_t> farthest_first_init(const std::vector<Segment>& segments,
                                             std::size_t k,
                                             const DtwOptions& opts,
                                             std::uint64_t seed) {
  if (k == 0) throw ArgumentError("farthest_first_init: k must be positive");
  if (k > segments.size()) {
    throw ArgumentError("farthest_first_init: k = " + std::to_string(k) +
                        " exceeds " + std::to_string(segments.size()) +
                        " segments");
  }
  std::map<std::size_t, std::size_t> length_counts;
  for (const auto& s : segments) ++length_counts[s.values.size()];
  std::size_t modal = 0;
  std::size_t modal_count = 0;
  for (const auto& [len, count] : length_counts) {
    if (count > modal_count) {
      modal = len;
      modal_count = count;
    }
  }
  std::vector<std::size_t> modal_idx;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].values.size() == modal) modal_idx.push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen{
      modal_idx[static_cast<std::size_t>(rng() % modal_idx.size())]};

  DtwOptions weighted = opts;
  weighted.weight_mode = WeightMode::volatility;
  std::vector<double> min_dist(segments.size(), kInf);
  std::vector<bool> taken(segments.size(), false);
  taken[chosen[0]] = true;
  while (chosen.size() < k) {
    const auto& last = segments[chosen.back()].values;
    std::size_t arg = segments.size();
    double best = -1.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      if (taken[i]) continue;
      min_dist[i] = std::min(min_dist[i],
                             pattern_distance(segments[i].values, last, weighted));
      if (min_dist[i] > best) {
        best = min_dist[i];
        arg = i;
      }
    }
    taken[arg] = true;
    chosen.push_back(arg);
  }
  return chosen;
}

DbaResult dba_centroid(const std::vector<std::vector<double>>& members,
                       std::size_t target_length,
                       std::span<const double> reference,
                       std::size_t iterations, LocalMetric metric) {
  if (members.empty()) throw ArgumentError("dba: empty member list");
  if (target_length == 0) throw ArgumentError("dba: target length must be positive");
  DbaResult out;
  out.centroid = resample(reference, target_length);
  out.cost_trace.push_back(total_dtw(members, out.centroid, metric));

  DtwOptions opts;
  opts.local_metric = metric;
  opts.with_path = true;
  for (std::size_t it = 0; it < iterations; ++it) {
    std::vector<std::vector<double>> aligned(target_length);
    for (const auto& member : members) {
      const DtwResult r = dtw_distance(out.centroid, member, opts);
      for (const auto& [i, j] : *r.path) aligned[i].push_back(member[j]);
    }
    std::vector<double> next(target_length);
    for (std::size_t i = 0; i < target_length; ++i) {
      next[i] = value_minimizer(aligned[i], metric);
    }
    const double cost = total_dtw(members, next, metric);
    if (next == out.centroid) {
      out.cost_trace.push_back(cost);
      break;
    }
    out.centroid = std::move(next);
    out.cost_trace.push_back(cost);
  }
  return out;
}

PatternLibrary kmeans_cluster(const std::vector<Segment>& segments,
                              const ClusterConfig& config) {
  if (config.l_min == 0 || config.l_min > config.l_max) {
    throw ArgumentError("kmeans: need 0 < l_min <= l_max");
  }
  if (config.max_iter == 0) throw ArgumentError("kmeans: max_iter must be positive");
  if (!(config.tol > 0.0)) throw ArgumentError("kmeans: tol must be positive");
  for (const auto& s : segments) {
    if (s.values.size() < config.l_min || s.values.size() > config.l_max) {
      throw ArgumentError("kmeans: segment length " +
                          std::to_string(s.values.size()) + " outside [l_min, l_max]");
    }
  }
  const auto init = farthest_first_init(segments, config.k, config.dtw, config.seed);
  std::vector<std::vector<double>> centroids;
  centroids.reserve(init.size());
  for (std::size_t idx : init) centroids.push_back(segments[idx].values);

  PatternLibrary lib;
  lib.k = config.k;
  lib.l_min = config.l_min;
  lib.l_max = config.l_max;
  lib.options = config.dtw;
  lib.options.with_path = false;

  Assignment current = assign(segments, centroids, lib.options);
  lib.inertia_trace.push_back(current.inertia);

  for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
    // Re-seed empty clusters with the segment farthest from its centroid,
    // taken only from clusters that keep at least one other member.
    std::vector<std::size_t> sizes(config.k, 0);
    for (std::size_t c : current.cluster) ++sizes[c];
    bool reseeded = false;
    for (std::size_t c = 0; c < config.k; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t arg = segments.size();
      double best = -1.0;
      for (std::size_t s = 0; s < segments.size(); ++s) {
        if (sizes[current.cluster[s]] < 2) continue;
        if (current.distance[s] > best) {
          best = current.distance[s];
          arg = s;
        }
      }
      if (arg == segments.size()) break;
      --sizes[current.cluster[arg]];
      ++sizes[c];
      current.cluster[arg] = c;
      current.distance[arg] = 0.0;
      centroids[c] = segments[arg].values;
      reseeded = true;
    }
    if (reseeded) current = assign(segments, centroids, lib.options);

    std::vector<std::vector<std::size_t>> members(config.k);
    for (std::size_t s = 0; s < segments.size(); ++s) {
      members[current.cluster[s]].push_back(s);
    }
    for (std::size_t c = 0; c < config.k; ++c) {
      if (members[c].empty()) continue;
      std::vector<std::size_t> lengths;
      std::vector<std::vector<double>> values;
      for (std::size_t s : members[c]) {
        lengths.push_back(segments[s].values.size());
        values.push_back(segments[s].values);
      }
      std::nth_element(lengths.begin(),
                       lengths.begin() + static_cast<std::ptrdiff_t>((lengths.size() - 1) / 2),
                       lengths.end());
      const std::size_t target = std::clamp(lengths[(lengths.size() - 1) / 2],
                                            config.l_min, config.l_max);
      auto candidate = dba_centroid(values, target, centroids[c],
                                    config.dba_iterations,
                                    config.dtw.local_metric)
                           .centroid;
      // Accept only non-worsening updates so the inertia trace is monotone.
      if (cluster_cost(segments, members[c], candidate, lib.options) <=
          cluster_cost(segments, members[c], centroids[c], lib.options)) {
        centroids[c] = std::move(candidate);
      }
    }

    Assignment next = assign(segments, centroids, lib.options);
    const double improvement = lib.inertia_trace.back() - next.inertia;
    current = std::move(next);
    lib.inertia_trace.push_back(current.inertia);
    if (improvement < config.tol) break;
  }

  lib.centroids = std::move(centroids);
  lib.inertia = current.inertia;
  lib.assignments = current.cluster;
  return lib;
}

Segmentation segment_series(std::span<const double> series,
                            const PatternLibrary& library) {
  if (library.centroids.empty()) throw ArgumentError("segment: empty library");
  if (library.l_min == 0 || library.l_min > library.l_max) {
    throw ArgumentError("segment: library has invalid length range");
  }
  if (series.size() < library.l_min) {
    throw ArgumentError("segment: series of length " +
                        std::to_string(series.size()) + " shorter than l_min " +
                        std::to_string(library.l_min));
  }
  Segmentation out;
  std::size_t t = 0;
  const std::size_t n = series.size();
  while (t < n) {
    if (n - t < library.l_min) {
      out.lengths.back() += n - t;
      out.remainder_merged = true;
      break;
    }
    double best = kInf;
    std::size_t best_len = 0;
    std::size_t best_p = 0;
    for (std::size_t len = library.l_min; len <= library.l_max && t + len <= n;
         ++len) {
      const auto candidate = z_normalize(series.subspan(t, len));
      for (std::size_t p = 0; p < library.centroids.size(); ++p) {
        const double d =
            pattern_distance(candidate, library.centroids[p], library.options);
        if (d < best) {
          best = d;
          best_len = len;
          best_p = p;
        }
      }
    }
    out.boundaries.push_back(t);
    out.lengths.push_back(best_len);
    out.assignments.push_back(best_p);
    out.distances.push_back(best);
    t += best_len;
  }
  return out;
}

}  // namespace fts
