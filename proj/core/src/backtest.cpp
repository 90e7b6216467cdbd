#include "fts/backtest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>

#include "fts/error.h"
#include "fts/log.h"

namespace fts {

namespace {

std::size_t label_index(const ReturnLabels& labels, const Date& date) {
  const auto it = std::lower_bound(labels.dates.begin(), labels.dates.end(), date);
  if (it == labels.dates.end() || *it != date) {
    throw DataError("backtest: no next-day return for " + format_date(date));
  }
  return static_cast<std::size_t>(it - labels.dates.begin());
}

void append(EquityCurve& curve, const Date& date, double r) {
  const double prev = curve.equity.empty() ? 1.0 : curve.equity.back();
  curve.dates.push_back(date);
  curve.daily_returns.push_back(r);
  curve.equity.push_back(prev * (1.0 + r));
}

double ratio(double num, double den) {
  if (den != 0.0) return num / den;
  if (num == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), num);
}

double sample_std(const std::vector<double>& x) {
  // A constant series has zero spread; the rounded mean would leave a residue.
  if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

std::string cell(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

EquityCurve topk_backtest(const ScoreTable& scores, const ReturnLabels& labels,
                          const std::vector<Date>& dates, const BacktestOptions& options) {
  const std::size_t b = labels.num_stocks;
  if (options.k == 0 || options.k > b) {
    throw ArgumentError("top-k: k must be in [1, " + std::to_string(b) + "], got " +
                        std::to_string(options.k));
  }
  EquityCurve curve;
  std::vector<std::size_t> order(b);
  for (const Date& date : dates) {
    const auto it = scores.days.find(date);
    if (it == scores.days.end()) {
      throw DataError("backtest: missing scores for " + format_date(date));
    }
    const auto& s = it->second;
    if (s.size() != b) {
      throw DataError("backtest: " + std::to_string(s.size()) + " scores for " +
                      std::to_string(b) + " stocks on " + format_date(date));
    }
    for (double v : s) {
      if (!std::isfinite(v)) throw DataError("backtest: non-finite score on " + format_date(date));
    }
    const std::size_t t = label_index(labels, date);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return s[x] > s[y]; });
    double r = 0.0;
    for (std::size_t i = 0; i < options.k; ++i) r += labels.at(order[i], t);
    append(curve, date, r / static_cast<double>(options.k) - options.cost_per_day);
  }
  return curve;
}

EquityCurve topk_backtest(const ScoreTable& scores, const ReturnLabels& labels,
                          std::size_t k) {
  std::vector<Date> dates;
  for (const auto& [date, _] : scores.days) dates.push_back(date);
  return topk_backtest(scores, labels, dates, BacktestOptions{k, 0.0});
}

EquityCurve equal_weight_curve(const ReturnLabels& labels, const std::vector<Date>& dates) {
  EquityCurve curve;
  for (const Date& date : dates) {
    const std::size_t t = label_index(labels, date);
    double r = 0.0;
    for (std::size_t s = 0; s < labels.num_stocks; ++s) r += labels.at(s, t);
    append(curve, date, r / static_cast<double>(labels.num_stocks));
  }
  return curve;
}

MetricsReport compute_metrics(const EquityCurve& curve, const MetricsOptions& options) {
  const auto& r = curve.daily_returns;
  if (r.size() < 2) throw ArgumentError("metrics: need at least 2 days");
  if (curve.equity.size() != r.size()) throw ArgumentError("metrics: curve shape mismatch");
  if (options.periods_per_year <= 0) throw ArgumentError("metrics: periods per year must be positive");
  if (!options.benchmark.empty() && options.benchmark.size() != r.size()) {
    throw ArgumentError("metrics: benchmark length differs from curve");
  }
  const double a = options.periods_per_year;
  MetricsReport out;
  out.trading_days_per_year = options.periods_per_year;
  out.days = r.size();
  out.arr = mean_of(r) * a;
  out.avol = sample_std(r) * std::sqrt(a);

  double peak = 1.0;
  double mdd = 0.0;
  for (double e : curve.equity) {
    if (!(e > 0.0)) throw NumericError("metrics: equity fell to zero or below");
    peak = std::max(peak, e);
    mdd = std::max(mdd, (peak - e) / peak);
  }
  out.mdd = mdd;

  out.asr = ratio(out.arr - options.risk_free_daily * a, out.avol);
  if (out.avol == 0.0) out.warnings.push_back("AVol is zero; ASR set to a sentinel");
  out.cr = ratio(out.arr, out.mdd);
  if (out.mdd == 0.0) out.warnings.push_back("MDD is zero; CR set to a sentinel");

  std::vector<double> active = r;
  for (std::size_t i = 0; i < active.size() && !options.benchmark.empty(); ++i) {
    active[i] -= options.benchmark[i];
  }
  const double te = sample_std(active);
  out.ir = ratio(mean_of(active), te) * std::sqrt(a);
  if (te == 0.0) out.warnings.push_back("tracking error is zero; IR set to a sentinel");
  for (const auto& w : out.warnings) log::warn("metrics: " + w);
  return out;
}

double metric_value(const MetricsReport& report, std::size_t metric) {
  switch (metric) {
    case 0:
      return report.arr;
    case 1:
      return report.avol;
    case 2:
      return report.mdd;
    case 3:
      return report.asr;
    case 4:
      return report.cr;
    case 5:
      return report.ir;
    default:
      throw ArgumentError("metric index out of range");
  }
}

bool metric_lower_is_better(std::size_t metric) { return metric == 1 || metric == 2; }

RankingTable compare_reports(const std::string& candidate_name,
                             const MetricsReport& candidate,
                             const std::vector<std::string>& baseline_names,
                             const std::vector<MetricsReport>& baselines) {
  if (baseline_names.size() != baselines.size()) {
    throw ArgumentError("compare_reports: names and reports differ in length");
  }
  RankingTable table;
  table.names.push_back(candidate_name);
  table.reports.push_back(candidate);
  table.names.insert(table.names.end(), baseline_names.begin(), baseline_names.end());
  table.reports.insert(table.reports.end(), baselines.begin(), baselines.end());
  const std::size_t n = table.reports.size();
  table.ranks.assign(n, std::vector<std::size_t>(6, 1));
  for (std::size_t m = 0; m < 6; ++m) {
    const bool lower = metric_lower_is_better(m);
    auto key = [&](std::size_t i) {
      const double v = metric_value(table.reports[i], m);
      return lower ? -std::abs(v) : v;
    };
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t better = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (key(j) > key(i)) ++better;
      }
      table.ranks[i][m] = better + 1;
    }
  }
  return table;
}

std::string format_metrics_table(const std::vector<std::string>& names,
                                 const std::vector<MetricsReport>& reports) {
  if (names.size() != reports.size()) {
    throw ArgumentError("format_metrics_table: names and reports differ in length");
  }
  std::size_t width = 5;
  for (const auto& n : names) width = std::max(width, n.size());
  std::string out(width, ' ');
  char buf[64];
  for (const char* h : kMetricNames) {
    std::snprintf(buf, sizeof buf, " %10s", h);
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out += names[i] + std::string(width - names[i].size(), ' ');
    for (std::size_t m = 0; m < 6; ++m) {
      std::snprintf(buf, sizeof buf, " %10s", cell(metric_value(reports[i], m)).c_str());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string format_ranking_table(const RankingTable& table) {
  std::size_t width = 5;
  for (const auto& n : table.names) width = std::max(width, n.size());
  std::string out(width, ' ');
  char buf[64];
  for (const char* h : kMetricNames) {
    std::snprintf(buf, sizeof buf, " %6s", h);
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < table.names.size(); ++i) {
    out += table.names[i] + std::string(width - table.names[i].size(), ' ');
    for (std::size_t m = 0; m < 6; ++m) {
      std::snprintf(buf, sizeof buf, " %6zu", table.ranks[i][m]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace fts
