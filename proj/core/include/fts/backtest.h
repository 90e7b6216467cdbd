#pragma once

// Top-K daily-rebalanced backtest and portfolio statistics.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "fts/panel.h"

namespace fts {

/// Per-day scores, one per stock in the label symbol order.
struct ScoreTable {
  std::map<Date, std::vector<double>> days;
};

struct EquityCurve {
  std::vector<Date> dates;
  std::vector<double> daily_returns;
  std::vector<double> equity;  // equity[i] = prod_{j<=i} (1 + r_j)
};

struct BacktestOptions {
  std::size_t k = 5;
  /// Subtracted from each holding's return.
  double cost_per_day = 0.0;
};

/// For each date in `dates`, holds the k highest-scored stocks equal-weighted
/// and earns the mean of their next-day returns. Ties keep symbol order.
/// Throws DataError when a date has no scores or no label.
EquityCurve topk_backtest(const ScoreTable& scores, const ReturnLabels& labels,
                          const std::vector<Date>& dates, const BacktestOptions& options);
/// Same over every date in the score table.
EquityCurve topk_backtest(const ScoreTable& scores, const ReturnLabels& labels,
                          std::size_t k);

/// Equal-weight portfolio of every stock on each date.
EquityCurve equal_weight_curve(const ReturnLabels& labels, const std::vector<Date>& dates);

struct MetricsReport {
  double arr = 0.0;
  double avol = 0.0;
  double mdd = 0.0;
  double asr = 0.0;
  double cr = 0.0;
  double ir = 0.0;
  int trading_days_per_year = 252;
  std::size_t days = 0;
  std::vector<std::string> warnings;
};

struct MetricsOptions {
  int periods_per_year = 252;
  double risk_free_daily = 0.0;
  /// Daily benchmark returns for IR; empty means zero.
  std::vector<double> benchmark;
};

/// ARR = mean * A, AVol = sample std * sqrt(A), MDD = largest peak-to-trough
/// fraction of [1, equity...], ASR = (ARR - rf * A) / AVol, CR = ARR / MDD,
/// IR = mean(active) / std(active) * sqrt(A). A zero denominator yields an
/// infinite ratio with the numerator's sign (zero when the numerator is zero)
/// and a warning.
MetricsReport compute_metrics(const EquityCurve& curve, const MetricsOptions& options = {});

inline constexpr const char* kMetricNames[6] = {"ARR", "AVol", "MDD", "ASR", "CR", "IR"};
double metric_value(const MetricsReport& report, std::size_t metric);
/// AVol and MDD rank by smaller magnitude; the rest by larger value.
bool metric_lower_is_better(std::size_t metric);

struct RankingTable {
  std::vector<std::string> names;
  std::vector<MetricsReport> reports;
  /// ranks[i][m]: 1-based competition rank of report i on metric m.
  std::vector<std::vector<std::size_t>> ranks;
};

/// Candidate first, then the baselines. Throws ArgumentError when names and
/// reports differ in length.
RankingTable compare_reports(const std::string& candidate_name,
                             const MetricsReport& candidate,
                             const std::vector<std::string>& baseline_names,
                             const std::vector<MetricsReport>& baselines);

/// Aligned text: one row per report, columns ARR AVol MDD ASR CR IR.
std::string format_metrics_table(const std::vector<std::string>& names,
                                 const std::vector<MetricsReport>& reports);
std::string format_ranking_table(const RankingTable& table);

}  // namespace fts
