#include "fts/patcher.h"

#include <algorithm>
#include <string>

#include "fts/error.h"

namespace fts {

std::vector<Channel> flatten_channels(const Array3& window) {
  if (window.data.size() != window.stocks * window.features * window.length) {
    throw ArgumentError("flatten_channels: malformed window");
  }
  std::vector<Channel> out;
  out.reserve(window.stocks * window.features);
  for (std::size_t b = 0; b < window.stocks; ++b) {
    for (std::size_t m = 0; m < window.features; ++m) {
      const auto s = window.series(b, m);
      out.push_back({b, m, {s.begin(), s.end()}});
    }
  }
  return out;
}

Array3 regroup_channels(const std::vector<Channel>& channels,
                        std::size_t stocks, std::size_t features) {
  if (channels.size() != stocks * features) {
    throw ArgumentError("regroup_channels: channel count mismatch");
  }
  const std::size_t length = channels.empty() ? 0 : channels.front().values.size();
  Array3 out(stocks, features, length);
  for (const auto& ch : channels) {
    if (ch.values.size() != length || ch.stock >= stocks || ch.feature >= features) {
      throw ArgumentError("regroup_channels: inconsistent channel");
    }
    std::copy(ch.values.begin(), ch.values.end(),
              out.series(ch.stock, ch.feature).begin());
  }
  return out;
}

std::vector<ExtractionPoint> extraction_points(
    std::span<const std::size_t> boundaries, std::size_t window_start,
    std::size_t window_length, const PatchOptions& options) {
  const std::size_t p = options.patch_length;
  if (p == 0 || options.stride == 0) {
    throw ArgumentError("extraction_points: patch length and stride must be positive");
  }
  if (p > window_length) {
    throw ArgumentError("extraction_points: patch length " + std::to_string(p) +
                        " exceeds window length " + std::to_string(window_length));
  }
  if (options.stride > p) {
    throw ArgumentError("extraction_points: stride must not exceed patch length");
  }
  const std::size_t last = window_length - p;

  std::vector<long long> relative;
  relative.reserve(boundaries.size());
  for (std::size_t b : boundaries) {
    relative.push_back(static_cast<long long>(b) - static_cast<long long>(window_start));
  }

  std::vector<ExtractionPoint> points;
  for (long long r : relative) {
    if (r >= 0 && r <= static_cast<long long>(last)) {
      points.push_back({static_cast<std::size_t>(r), PatchOrigin::segment});
    }
  }
  for (std::size_t g = 0; g <= last; g += options.stride) {
    if (options.drop_boundary_crossing && g != last) {
      const bool crosses = std::any_of(relative.begin(), relative.end(), [&](long long r) {
        return r > static_cast<long long>(g) && r < static_cast<long long>(g + p);
      });
      if (crosses) continue;
    }
    points.push_back({g, PatchOrigin::stride});
  }
  points.push_back({last, PatchOrigin::stride});

  // Segment origin wins on duplicates: it sorts first among equal positions.
  std::stable_sort(points.begin(), points.end(),
                   [](const ExtractionPoint& a, const ExtractionPoint& b) {
                     if (a.position != b.position) return a.position < b.position;
                     return a.origin == PatchOrigin::segment &&
                            b.origin != PatchOrigin::segment;
                   });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const ExtractionPoint& a, const ExtractionPoint& b) {
                             return a.position == b.position;
                           }),
               points.end());
  return points;
}

std::vector<ExtractionPoint> extraction_points(const Segmentation& segmentation,
                                               std::size_t window_start,
                                               std::size_t window_length,
                                               const PatchOptions& options) {
  return extraction_points(std::span<const std::size_t>(segmentation.boundaries),
                           window_start, window_length, options);
}

PatchSet extract_patches(std::span<const double> sequence,
                         std::span<const ExtractionPoint> points,
                         std::size_t patch_length, std::size_t channel) {
  if (patch_length == 0 || patch_length > sequence.size()) {
    throw ArgumentError("extract_patches: invalid patch length");
  }
  PatchSet out;
  out.patch_length = patch_length;
  out.channel = channel;
  out.patches.reserve(points.size() * patch_length);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t pos = points[i].position;
    if (pos + patch_length > sequence.size()) {
      throw ArgumentError("extract_patches: position " + std::to_string(pos) +
                          " out of range");
    }
    if (i > 0 && pos <= points[i - 1].position) {
      throw ArgumentError("extract_patches: positions must be strictly increasing");
    }
    out.positions.push_back(pos);
    out.origins.push_back(points[i].origin);
    out.patches.insert(out.patches.end(),
                       sequence.begin() + static_cast<std::ptrdiff_t>(pos),
                       sequence.begin() + static_cast<std::ptrdiff_t>(pos + patch_length));
  }
  return out;
}

NextPatchPairs next_patch_targets(const PatchSet& patches) {
  if (patches.size() < 2) {
    throw ArgumentError("next_patch_targets: need at least 2 patches");
  }
  NextPatchPairs out;
  for (std::size_t k = 0; k + 1 < patches.size(); ++k) {
    out.input_index.push_back(k);
    out.target_index.push_back(k + 1);
  }
  return out;
}

}  // namespace fts
