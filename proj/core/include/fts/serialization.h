#pragma once

// Versioned JSON and CSV artifacts. Every JSON document carries a "format"
// name and an integer "version"; readers reject anything else with DataError.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fts/backtest.h"
#include "fts/predictor.h"
#include "fts/sipr.h"
#include "fts/swt.h"

namespace fts {

inline constexpr int kArtifactVersion = 1;

std::string read_text_file(const std::filesystem::path& path);
/// Writes atomically enough for a single process: to a sibling temp file, then rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::string library_to_json(const PatternLibrary& library);
PatternLibrary library_from_json(std::string_view text);

std::string filters_to_json(const FilterBank& bank);
FilterBank filters_from_json(std::string_view text);

std::string segmentation_to_json(const std::vector<std::string>& symbols,
                                 const std::vector<Segmentation>& segmentations);
std::vector<Segmentation> segmentation_from_json(std::string_view text,
                                                 std::vector<std::string>* symbols = nullptr);

/// Parameters, filters, completed epochs per stage and the loss trace.
std::string checkpoint_to_json(const TrainState& state);
TrainState checkpoint_from_json(std::string_view text);

/// Infinite ratios are written as the strings "inf" / "-inf".
std::string metrics_to_json(const MetricsReport& report);
MetricsReport metrics_from_json(std::string_view text);

/// Header `epoch,stage,loss`.
std::string trace_to_csv(const std::vector<TraceEntry>& trace);

}  // namespace fts
