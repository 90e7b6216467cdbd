#include "fts_cli/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <variant>

#include "fts/error.h"
#include "fts/panel.h"
#include "fts/predictor.h"
#include "fts/serialization.h"
#include "fts/swt.h"

namespace fts::cli {

namespace {

using Member =
    std::variant<std::string RunConfig::*, std::size_t RunConfig::*, double RunConfig::*,
                 bool RunConfig::*, int RunConfig::*, unsigned long long RunConfig::*,
                 std::vector<std::string> RunConfig::*>;

struct Field {
  const char* key;
  Member member;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"panel", &RunConfig::panel},
      {"model_features", &RunConfig::model_features},
      {"price_feature", &RunConfig::price_feature},
      {"index_feature", &RunConfig::index_feature},
      {"validation_start", &RunConfig::validation_start},
      {"test_start", &RunConfig::test_start},
      {"out_dir", &RunConfig::out_dir},
      {"use_sipr", &RunConfig::use_sipr},
      {"k", &RunConfig::k},
      {"l_min", &RunConfig::l_min},
      {"l_max", &RunConfig::l_max},
      {"cluster_stride", &RunConfig::cluster_stride},
      {"max_iter", &RunConfig::max_iter},
      {"tol", &RunConfig::tol},
      {"dba_iterations", &RunConfig::dba_iterations},
      {"dtw_metric", &RunConfig::dtw_metric},
      {"dtw_weights", &RunConfig::dtw_weights},
      {"volatility_window", &RunConfig::volatility_window},
      {"band_radius", &RunConfig::band_radius},
      {"window_length", &RunConfig::window_length},
      {"patch_length", &RunConfig::patch_length},
      {"patch_stride", &RunConfig::patch_stride},
      {"drop_boundary_crossing", &RunConfig::drop_boundary_crossing},
      {"sample_stride", &RunConfig::sample_stride},
      {"wavelet", &RunConfig::wavelet},
      {"levels", &RunConfig::levels},
      {"wavelet_trainable", &RunConfig::wavelet_trainable},
      {"freeze_filters", &RunConfig::freeze_filters},
      {"shared_filters", &RunConfig::shared_filters},
      {"model_dim", &RunConfig::model_dim},
      {"learning_rate", &RunConfig::learning_rate},
      {"pretrain_epochs", &RunConfig::pretrain_epochs},
      {"epochs", &RunConfig::epochs},
      {"batch_size", &RunConfig::batch_size},
      {"loss_mode", &RunConfig::loss_mode},
      {"filter_penalty", &RunConfig::filter_penalty},
      {"top_k", &RunConfig::top_k},
      {"periods_per_year", &RunConfig::periods_per_year},
      {"risk_free", &RunConfig::risk_free},
      {"benchmark", &RunConfig::benchmark},
      {"seed", &RunConfig::seed},
  };
  return table;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string normalize_key(std::string_view key) {
  std::string out(key);
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  throw ConfigError("'" + std::string(key) + "': expected " + std::string(expected) +
                    ", got '" + std::string(value) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::string_view expected) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) bad_value(key, value, expected);
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

std::vector<std::string> parse_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const auto item = trim(value.substr(pos, comma == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

[[noreturn]] void invalid(std::string_view key, const std::string& why) {
  throw ConfigError("'" + std::string(key) + "' " + why);
}

void require_positive(std::string_view key, std::size_t v) {
  if (v == 0) invalid(key, "must be positive");
}

void require_one_of(std::string_view key, const std::string& v,
                    std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (v == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : "|") + std::string(a);
  invalid(key, "must be one of " + list + ", got '" + v + "'");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
  }();
  return keys;
}

void set_value(RunConfig& config, std::string_view raw_key, std::string_view raw_value) {
  const std::string key = normalize_key(raw_key);
  const std::string value = trim(raw_value);
  const auto it = std::find_if(fields().begin(), fields().end(),
                               [&](const Field& f) { return key == f.key; });
  if (it == fields().end()) throw ConfigError("unknown config key '" + key + "'");
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(config.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          config.*member = value;
        } else if constexpr (std::is_same_v<T, bool>) {
          config.*member = parse_bool(key, value);
        } else if constexpr (std::is_same_v<T, double>) {
          const double v = parse_number<double>(key, value, "a number");
          if (!std::isfinite(v)) bad_value(key, value, "a finite number");
          config.*member = v;
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
          config.*member = parse_list(value);
        } else {
          config.*member = parse_number<T>(key, value, "a non-negative integer");
        }
      },
      it->member);
}

void parse_config_text(RunConfig& config, std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  RunConfig config;
  try {
    parse_config_text(config, text);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config;
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    std::visit(
        [&](auto member) {
          using T = std::remove_cvref_t<decltype(config.*member)>;
          const auto& v = config.*member;
          if constexpr (std::is_same_v<T, std::string>) {
            out += v;
          } else if constexpr (std::is_same_v<T, bool>) {
            out += v ? "true" : "false";
          } else if constexpr (std::is_same_v<T, double>) {
            out += format_double(v);
          } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
            for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
          } else {
            out += std::to_string(v);
          }
        },
        f.member);
    out += '\n';
  }
  return out;
}

void validate(const RunConfig& c) {
  if (c.panel.empty()) invalid("panel", "is required");
  if (c.price_feature.empty()) invalid("price_feature", "is required");
  if (c.index_feature.empty()) invalid("index_feature", "is required");
  if (c.out_dir.empty()) invalid("out_dir", "is required");
  for (const char* key : {"validation_start", "test_start"}) {
    const auto& v = std::string_view(key) == "validation_start" ? c.validation_start : c.test_start;
    if (v.empty()) invalid(key, "is required");
    try {
      (void)parse_date(v);
    } catch (const Error&) {
      invalid(key, "must be a YYYY-MM-DD date, got '" + v + "'");
    }
  }
  if (!(parse_date(c.validation_start) < parse_date(c.test_start))) {
    invalid("test_start", "must come after validation_start");
  }

  require_positive("k", c.k);
  if (c.l_min < 2) invalid("l_min", "must be at least 2");
  if (c.l_max < c.l_min) invalid("l_max", "must be >= l_min");
  require_positive("cluster_stride", c.cluster_stride);
  require_positive("max_iter", c.max_iter);
  if (!(c.tol >= 0.0)) invalid("tol", "must be non-negative");
  require_one_of("dtw_metric", c.dtw_metric, {"absolute", "squared"});
  require_one_of("dtw_weights", c.dtw_weights, {"uniform", "volatility"});
  if (c.volatility_window < 2 || c.volatility_window > c.l_min) {
    invalid("volatility_window", "must be in [2, l_min]");
  }
  if (c.band_radius != 0 && c.band_radius < c.l_max - c.l_min) {
    invalid("band_radius", "must be 0 or >= l_max - l_min");
  }

  require_positive("patch_length", c.patch_length);
  require_positive("patch_stride", c.patch_stride);
  if (c.patch_stride > c.patch_length) invalid("patch_stride", "must be <= patch_length");
  if (c.window_length < c.patch_length) invalid("window_length", "must be >= patch_length");
  require_positive("sample_stride", c.sample_stride);

  require_one_of("wavelet", c.wavelet, {"haar", "db4"});
  require_positive("levels", c.levels);
  const std::size_t taps = parse_basis(c.wavelet) == WaveletBasis::haar ? 2 : 8;
  const std::size_t max_s = max_levels(c.patch_length, taps);
  if (c.levels > max_s) {
    invalid("levels", "allows at most " + std::to_string(max_s) + " for " + c.wavelet +
                          " on patches of " + std::to_string(c.patch_length));
  }

  require_positive("model_dim", c.model_dim);
  if (!(c.learning_rate >= 0.0)) invalid("learning_rate", "must be non-negative");
  require_positive("batch_size", c.batch_size);
  require_one_of("loss_mode", c.loss_mode, {"next_patch", "score", "joint"});
  if (!(c.filter_penalty >= 0.0)) invalid("filter_penalty", "must be non-negative");

  require_positive("top_k", c.top_k);
  if (c.periods_per_year <= 0) invalid("periods_per_year", "must be positive");
  require_one_of("benchmark", c.benchmark, {"zero", "equal"});
}

}  // namespace fts::cli
