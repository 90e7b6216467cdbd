#include "fts/panel.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "fts/error.h"

namespace fts {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      return fields;
    }
    fields.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

// Empty cells and NaN literals are missing values, resolved by forward fill.
std::optional<double> parse_cell(std::string_view cell, std::size_t line,
                                 std::string_view column) {
  cell = trim(cell);
  if (cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA") {
    return std::nullopt;
  }
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(line, "non-numeric value '" + std::string(cell) +
                               "' in column '" + std::string(column) + "'");
  }
  if (std::isnan(value)) return std::nullopt;
  if (!std::isfinite(value)) {
    throw ParseError(line, "non-finite value in column '" +
                               std::string(column) + "'");
  }
  return value;
}

bool operator_less(const Date& a, const Date& b) {
  return std::chrono::sys_days(a) < std::chrono::sys_days(b);
}

struct Row {
  Date date;
  std::vector<std::optional<double>> cells;
};

void append_double(std::string& out, double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  out.append(buffer, ptr);
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  auto fail = [&]() -> Date {
    throw ArgumentError("invalid date '" + std::string(text) +
                        "', expected YYYY-MM-DD");
  };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return fail();
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  auto parse_part = [&](std::string_view part, auto& out) {
    const auto [ptr, ec] =
        std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc() && ptr == part.data() + part.size();
  };
  if (!parse_part(text.substr(0, 4), y) || !parse_part(text.substr(5, 2), m) ||
      !parse_part(text.substr(8, 2), d)) {
    return fail();
  }
  const Date date{std::chrono::year{y}, std::chrono::month{m},
                  std::chrono::day{d}};
  if (!date.ok()) return fail();
  return date;
}

std::string format_date(const Date& date) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u",
                static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return buffer;
}

StockPanel::StockPanel(std::vector<std::string> symbols,
                       std::vector<Date> calendar,
                       std::vector<std::string> feature_names, Array3 values)
    : symbols_(std::move(symbols)),
      calendar_(std::move(calendar)),
      feature_names_(std::move(feature_names)),
      values_(std::move(values)) {
  if (symbols_.empty() || feature_names_.empty() || calendar_.empty()) {
    throw DataError("panel needs at least one stock, feature and date");
  }
  if (values_.stocks != symbols_.size() ||
      values_.features != feature_names_.size() ||
      values_.length != calendar_.size() ||
      values_.data.size() != values_.stocks * values_.features * values_.length) {
    throw DataError("panel value block does not match B x M x T");
  }
  for (std::size_t t = 1; t < calendar_.size(); ++t) {
    if (!operator_less(calendar_[t - 1], calendar_[t])) {
      throw DataError("calendar not strictly increasing at " +
                      format_date(calendar_[t]));
    }
  }
  for (double v : values_.data) {
    if (!std::isfinite(v)) throw DataError("panel contains non-finite values");
  }
}

std::size_t StockPanel::feature_index(std::string_view name) const {
  const auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) {
    throw ArgumentError("unknown feature '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - feature_names_.begin());
}

std::size_t StockPanel::lower_bound(const Date& date) const {
  const auto it = std::lower_bound(calendar_.begin(), calendar_.end(), date,
                                   operator_less);
  return static_cast<std::size_t>(it - calendar_.begin());
}

Array3 StockPanel::window(std::size_t t_begin, std::size_t t_end) const {
  if (t_begin > t_end || t_end > num_days()) {
    throw ArgumentError("window [" + std::to_string(t_begin) + ", " +
                        std::to_string(t_end) + ") outside panel of " +
                        std::to_string(num_days()) + " days");
  }
  Array3 out(num_stocks(), num_features(), t_end - t_begin);
  for (std::size_t b = 0; b < num_stocks(); ++b) {
    for (std::size_t m = 0; m < num_features(); ++m) {
      const auto src = series(b, m);
      std::copy(src.begin() + static_cast<std::ptrdiff_t>(t_begin),
                src.begin() + static_cast<std::ptrdiff_t>(t_end),
                out.series(b, m).begin());
    }
  }
  return out;
}

StockPanel StockPanel::slice_days(std::size_t t_begin, std::size_t t_end) const {
  Array3 block = window(t_begin, t_end);
  std::vector<Date> dates(calendar_.begin() + static_cast<std::ptrdiff_t>(t_begin),
                          calendar_.begin() + static_cast<std::ptrdiff_t>(t_end));
  return StockPanel(symbols_, std::move(dates), feature_names_,
                    std::move(block));
}

StockPanel StockPanel::select_features(
    const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  idx.reserve(names.size());
  for (const auto& name : names) idx.push_back(feature_index(name));
  Array3 block(num_stocks(), names.size(), num_days());
  for (std::size_t b = 0; b < num_stocks(); ++b) {
    for (std::size_t j = 0; j < idx.size(); ++j) {
      const auto src = series(b, idx[j]);
      std::copy(src.begin(), src.end(), block.series(b, j).begin());
    }
  }
  return StockPanel(symbols_, calendar_, names, std::move(block));
}

StockPanel parse_panel(std::string_view text, const IngestConfig& config) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& out) {
    while (pos < text.size()) {
      const std::size_t end = text.find('\n', pos);
      const std::size_t stop = end == std::string_view::npos ? text.size() : end;
      out = trim(text.substr(pos, stop - pos));
      pos = stop + 1;
      ++line_no;
      if (!out.empty()) return true;
    }
    return false;
  };

  std::string_view header_line;
  if (!next_line(header_line)) throw DataError("empty panel file");
  const auto header = split_fields(header_line);
  if (header.size() < 3 || trim(header[0]) != "date" ||
      trim(header[1]) != "symbol") {
    throw ParseError(line_no,
                     "header must be date,symbol,<feature_1>,...,<feature_M>");
  }
  std::vector<std::string> columns;
  for (std::size_t i = 2; i < header.size(); ++i) {
    columns.emplace_back(trim(header[i]));
  }

  std::vector<std::size_t> keep;
  std::vector<std::string> feature_names;
  if (config.features.empty()) {
    for (std::size_t i = 0; i < columns.size(); ++i) keep.push_back(i);
    feature_names = columns;
  } else {
    for (const auto& want : config.features) {
      const auto it = std::find(columns.begin(), columns.end(), want);
      if (it == columns.end()) {
        throw DataError("feature column '" + want + "' missing from header");
      }
      keep.push_back(static_cast<std::size_t>(it - columns.begin()));
      feature_names.push_back(want);
    }
  }

  std::map<std::string, std::vector<Row>> by_symbol;
  std::vector<Date> all_dates;
  std::string_view line;
  while (next_line(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                    " fields, found " +
                                    std::to_string(fields.size()));
    }
    Date date;
    try {
      date = parse_date(fields[0]);
    } catch (const ArgumentError& e) {
      throw ParseError(line_no, e.what());
    }
    const std::string symbol(trim(fields[1]));
    if (symbol.empty()) throw ParseError(line_no, "empty symbol");
    Row row{date, {}};
    row.cells.reserve(keep.size());
    for (std::size_t col : keep) {
      row.cells.push_back(parse_cell(fields[col + 2], line_no, columns[col]));
    }
    auto& rows = by_symbol[symbol];
    if (!rows.empty() && !operator_less(rows.back().date, date)) {
      throw DataError("dates for symbol '" + symbol +
                      "' are not strictly increasing at line " +
                      std::to_string(line_no));
    }
    rows.push_back(std::move(row));
    all_dates.push_back(date);
  }
  if (by_symbol.empty()) throw DataError("panel file has no data rows");

  std::sort(all_dates.begin(), all_dates.end(), operator_less);
  all_dates.erase(std::unique(all_dates.begin(), all_dates.end()),
                  all_dates.end());

  const std::size_t n_stocks = by_symbol.size();
  const std::size_t n_feat = feature_names.size();
  const std::size_t n_all = all_dates.size();
  // Forward fill on the full calendar; NaN marks "no value yet".
  std::vector<double> filled(n_stocks * n_feat * n_all,
                             std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> symbols;
  std::size_t first_complete = 0;
  std::size_t s = 0;
  for (const auto& [symbol, rows] : by_symbol) {
    if (rows.size() < 2) {
      throw DataError("symbol '" + symbol + "' has fewer than 2 dates");
    }
    symbols.push_back(symbol);
    std::vector<double> last(n_feat, std::numeric_limits<double>::quiet_NaN());
    std::size_t r = 0;
    for (std::size_t t = 0; t < n_all; ++t) {
      if (r < rows.size() && rows[r].date == all_dates[t]) {
        for (std::size_t m = 0; m < n_feat; ++m) {
          if (rows[r].cells[m]) last[m] = *rows[r].cells[m];
        }
        ++r;
      }
      for (std::size_t m = 0; m < n_feat; ++m) {
        filled[(s * n_feat + m) * n_all + t] = last[m];
      }
    }
    for (std::size_t m = 0; m < n_feat; ++m) {
      std::size_t t = 0;
      while (t < n_all && std::isnan(filled[(s * n_feat + m) * n_all + t])) ++t;
      if (t == n_all) {
        throw DataError("symbol '" + symbol + "' has no values for feature '" +
                        feature_names[m] + "'");
      }
      first_complete = std::max(first_complete, t);
    }
    ++s;
  }
  if (n_all - first_complete < 2) {
    throw DataError("fewer than 2 dates remain after aligning symbols");
  }

  const std::size_t n_days = n_all - first_complete;
  Array3 values(n_stocks, n_feat, n_days);
  for (std::size_t b = 0; b < n_stocks; ++b) {
    for (std::size_t m = 0; m < n_feat; ++m) {
      const double* src = filled.data() + (b * n_feat + m) * n_all + first_complete;
      std::copy(src, src + n_days, values.series(b, m).begin());
    }
  }
  std::vector<Date> calendar(all_dates.begin() + static_cast<std::ptrdiff_t>(first_complete),
                             all_dates.end());
  return StockPanel(std::move(symbols), std::move(calendar),
                    std::move(feature_names), std::move(values));
}

StockPanel load_panel(const std::filesystem::path& path,
                      const IngestConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open panel file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_panel(buffer.str(), config);
}

std::string format_panel(const StockPanel& panel) {
  std::string out = "date,symbol";
  for (const auto& name : panel.feature_names()) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t t = 0; t < panel.num_days(); ++t) {
    const std::string date = format_date(panel.calendar()[t]);
    for (std::size_t b = 0; b < panel.num_stocks(); ++b) {
      out += date;
      out += ',';
      out += panel.symbols()[b];
      for (std::size_t m = 0; m < panel.num_features(); ++m) {
        out += ',';
        append_double(out, panel.values().at(b, m, t));
      }
      out += '\n';
    }
  }
  return out;
}

void write_panel(const StockPanel& panel, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write panel file '" + path.string() + "'");
  out << format_panel(panel);
}

StockPanel normalize(const StockPanel& panel, const DateRange& stats_window,
                     double std_floor) {
  const auto& cal = panel.calendar();
  if (operator_less(stats_window.last, stats_window.first)) {
    throw ArgumentError("normalization window is empty");
  }
  if (operator_less(stats_window.first, cal.front()) ||
      operator_less(cal.back(), stats_window.last)) {
    throw ArgumentError("normalization window " +
                        format_date(stats_window.first) + ".." +
                        format_date(stats_window.last) +
                        " outside panel calendar");
  }
  const std::size_t begin = panel.lower_bound(stats_window.first);
  std::size_t end = begin;
  while (end < cal.size() && !operator_less(stats_window.last, cal[end])) ++end;
  if (end == begin) throw ArgumentError("normalization window holds no dates");

  Array3 out = panel.values();
  const double n = static_cast<double>(end - begin);
  for (std::size_t b = 0; b < panel.num_stocks(); ++b) {
    for (std::size_t m = 0; m < panel.num_features(); ++m) {
      auto series = out.series(b, m);
      double mean = 0.0;
      for (std::size_t t = begin; t < end; ++t) mean += series[t];
      mean /= n;
      double var = 0.0;
      for (std::size_t t = begin; t < end; ++t) {
        var += (series[t] - mean) * (series[t] - mean);
      }
      const double sd = std::max(std::sqrt(var / n), std_floor);
      for (double& v : series) v = (v - mean) / sd;
    }
  }
  return StockPanel(panel.symbols(), panel.calendar(), panel.feature_names(),
                    std::move(out));
}

ReturnLabels compute_labels(const StockPanel& panel,
                            std::string_view price_feature) {
  const std::size_t f = panel.feature_index(price_feature);
  ReturnLabels labels;
  labels.symbols = panel.symbols();
  labels.num_stocks = panel.num_stocks();
  labels.dates.assign(panel.calendar().begin(), panel.calendar().end() - 1);
  const std::size_t width = labels.dates.size();
  labels.values.resize(labels.num_stocks * width);
  for (std::size_t b = 0; b < panel.num_stocks(); ++b) {
    const auto price = panel.series(b, f);
    for (std::size_t t = 0; t < price.size(); ++t) {
      if (!(price[t] > 0.0)) {
        throw DataError("non-positive price for '" + panel.symbols()[b] +
                        "' on " + format_date(panel.calendar()[t]));
      }
    }
    for (std::size_t t = 0; t < width; ++t) {
      labels.values[b * width + t] = price[t + 1] / price[t] - 1.0;
    }
  }
  return labels;
}

PanelSplit chronological_split(const StockPanel& panel,
                               const Date& validation_start,
                               const Date& test_start) {
  if (operator_less(test_start, validation_start)) {
    throw ConfigError("split boundaries out of order: " +
                      format_date(validation_start) + " after " +
                      format_date(test_start));
  }
  const std::size_t v = panel.lower_bound(validation_start);
  const std::size_t s = panel.lower_bound(test_start);
  const std::size_t t = panel.num_days();
  if (v == 0) throw ConfigError("training split is empty");
  if (s == v) throw ConfigError("validation split is empty");
  if (s == t) throw ConfigError("test split is empty");
  return {panel.slice_days(0, v), panel.slice_days(v, s),
          panel.slice_days(s, t)};
}

}  // namespace fts
