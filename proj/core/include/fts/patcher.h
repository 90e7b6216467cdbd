#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fts/panel.h"
#include "fts/sipr.h"

namespace fts {

enum class PatchOrigin { segment, stride };

struct ExtractionPoint {
  std::size_t position = 0;
  PatchOrigin origin = PatchOrigin::stride;
};

struct PatchSet {
  std::size_t patch_length = 0;
  std::size_t channel = 0;
  std::vector<std::size_t> positions;
  std::vector<PatchOrigin> origins;
  std::vector<double> patches;  // N_p x P, row-major

  std::size_t size() const { return positions.size(); }
  std::span<const double> patch(std::size_t i) const {
    return {patches.data() + i * patch_length, patch_length};
  }
};

struct Channel {
  std::size_t stock = 0;
  std::size_t feature = 0;
  std::vector<double> values;
};

/// B*M univariate sequences in stock-major order: channel index b*M + m.
std::vector<Channel> flatten_channels(const Array3& window);
/// Inverse of flatten_channels.
Array3 regroup_channels(const std::vector<Channel>& channels,
                        std::size_t stocks, std::size_t features);

struct PatchOptions {
  std::size_t patch_length = 16;
  std::size_t stride = 8;
  /// Drop stride-grid points whose patch spans a segment boundary. The final
  /// point L - P is always kept.
  bool drop_boundary_crossing = false;
};

/// Union of the segment boundaries shifted by -window_start (kept when inside
/// [0, L-P]) and the stride grid, plus L-P. Sorted and deduplicated; a point
/// that is both a boundary and a grid point is tagged `segment`.
std::vector<ExtractionPoint> extraction_points(
    std::span<const std::size_t> boundaries, std::size_t window_start,
    std::size_t window_length, const PatchOptions& options);

std::vector<ExtractionPoint> extraction_points(const Segmentation& segmentation,
                                               std::size_t window_start,
                                               std::size_t window_length,
                                               const PatchOptions& options);

PatchSet extract_patches(std::span<const double> sequence,
                         std::span<const ExtractionPoint> points,
                         std::size_t patch_length, std::size_t channel = 0);

struct NextPatchPairs {
  std::vector<std::size_t> input_index;   // k
  std::vector<std::size_t> target_index;  // k + 1
};

/// Pairs patch k with patch k+1 in position order: N_p - 1 pairs.
NextPatchPairs next_patch_targets(const PatchSet& patches);

}  // namespace fts
