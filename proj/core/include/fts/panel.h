#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fts {

using Date = std::chrono::year_month_day;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws ArgumentError.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

/// Dense B x M x L block, row-major with time fastest.
struct Array3 {
  std::size_t stocks = 0;
  std::size_t features = 0;
  std::size_t length = 0;
  std::vector<double> data;

  Array3() = default;
  Array3(std::size_t b, std::size_t m, std::size_t l, double fill = 0.0)
      : stocks(b), features(m), length(l), data(b * m * l, fill) {}

  std::span<double> series(std::size_t b, std::size_t m) {
    return {data.data() + (b * features + m) * length, length};
  }
  std::span<const double> series(std::size_t b, std::size_t m) const {
    return {data.data() + (b * features + m) * length, length};
  }
  double& at(std::size_t b, std::size_t m, std::size_t t) {
    return data[(b * features + m) * length + t];
  }
  double at(std::size_t b, std::size_t m, std::size_t t) const {
    return data[(b * features + m) * length + t];
  }
};

/// Cross-section of per-stock multivariate daily series on a shared calendar.
/// Immutable once built; every transform returns a new panel.
class StockPanel {
 public:
  StockPanel() = default;
  /// Validates shapes, calendar ordering and finiteness. Throws DataError.
  StockPanel(std::vector<std::string> symbols, std::vector<Date> calendar,
             std::vector<std::string> feature_names, Array3 values);

  std::size_t num_stocks() const { return symbols_.size(); }
  std::size_t num_features() const { return feature_names_.size(); }
  std::size_t num_days() const { return calendar_.size(); }

  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::vector<Date>& calendar() const { return calendar_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  const Array3& values() const { return values_; }

  std::span<const double> series(std::size_t stock, std::size_t feature) const {
    return values_.series(stock, feature);
  }

  /// Index of a feature by name. Throws ArgumentError when absent.
  std::size_t feature_index(std::string_view name) const;
  /// Index of the first calendar date >= `date`; num_days() if none.
  std::size_t lower_bound(const Date& date) const;

  /// Copy of days [t_begin, t_end) as a B x M x (t_end - t_begin) block.
  Array3 window(std::size_t t_begin, std::size_t t_end) const;
  /// Sub-panel over days [t_begin, t_end).
  StockPanel slice_days(std::size_t t_begin, std::size_t t_end) const;
  /// Sub-panel keeping only the named features, in the given order.
  StockPanel select_features(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> symbols_;
  std::vector<Date> calendar_;
  std::vector<std::string> feature_names_;
  Array3 values_;
};

/// Next-day simple returns: value(s, t) = p(s, t+1) / p(s, t) - 1, for the
/// dates calendar[0 .. T-2] of the source panel.
struct ReturnLabels {
  std::vector<std::string> symbols;
  std::vector<Date> dates;
  std::size_t num_stocks = 0;
  std::vector<double> values;  // stock-major, num_stocks x dates.size()

  double at(std::size_t stock, std::size_t t) const {
    return values[stock * dates.size() + t];
  }
  std::size_t width() const { return dates.size(); }
};

struct IngestConfig {
  /// Feature columns to keep; empty keeps every column after `symbol`.
  std::vector<std::string> features;
};

struct DateRange {
  Date first;
  Date last;  // inclusive
};

struct PanelSplit {
  StockPanel train;
  StockPanel validation;
  StockPanel test;
};

/// Reads the `date,symbol,<features...>` CSV. Dates missing for a symbol are
/// forward-filled; leading dates where any symbol has no value yet are dropped.
StockPanel load_panel(const std::filesystem::path& path,
                      const IngestConfig& config = {});
StockPanel parse_panel(std::string_view csv_text,
                       const IngestConfig& config = {});

/// Writes the panel in the ingestion format with round-trip double precision.
void write_panel(const StockPanel& panel, const std::filesystem::path& path);
std::string format_panel(const StockPanel& panel);

/// Per-(stock, feature) z-score whose mean and population std are estimated
/// on `stats_window` only. Std is floored at `std_floor`.
StockPanel normalize(const StockPanel& panel, const DateRange& stats_window,
                     double std_floor = 1e-8);

ReturnLabels compute_labels(const StockPanel& panel,
                            std::string_view price_feature);

/// Train = [start, validation_start), validation = [validation_start,
/// test_start), test = [test_start, end]. Every part must be non-empty.
PanelSplit chronological_split(const StockPanel& panel,
                               const Date& validation_start,
                               const Date& test_start);

}  // namespace fts
