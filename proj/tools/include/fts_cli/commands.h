#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fts/backtest.h"
#include "fts_cli/config.h"

namespace fts::cli {

void cmd_cluster(const RunConfig& config);
void cmd_segment(const RunConfig& config);
/// Wavelet tokens of the look-back windows ending at `day` (default: the
/// last day with a full window), written to tokens.json.
void cmd_tokenize(const RunConfig& config, std::optional<std::string> day);
/// `resume` continues from the checkpoint in out_dir.
void cmd_train(const RunConfig& config, bool resume);

enum class Scorer { model, oracle, equal };
Scorer parse_scorer(const std::string& name);

struct BacktestRequest {
  Scorer scorer = Scorer::model;
  /// Filter bank from another run, replacing the checkpoint's.
  std::optional<std::filesystem::path> filters;
  std::optional<std::filesystem::path> checkpoint;
};
MetricsReport cmd_backtest(const RunConfig& config, const BacktestRequest& request);

/// Prints the comparison and ranking tables of saved metrics reports.
std::string cmd_report(const std::vector<std::filesystem::path>& reports);

struct SynthRequest {
  std::string kind = "motif";  // motif | wavelet
  std::filesystem::path out;
  std::uint64_t seed = 7;
  std::size_t stocks = 8;
  std::size_t days = 400;
};
void cmd_synth(const SynthRequest& request);

}  // namespace fts::cli
