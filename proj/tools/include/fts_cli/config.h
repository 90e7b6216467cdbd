#pragma once

// Run configuration: `key = value` lines, `#` comments, plus overrides.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fts::cli {

struct RunConfig {
  // Data.
  std::string panel;
  std::vector<std::string> model_features;  // empty: every feature
  std::string price_feature = "close";
  std::string index_feature = "signal";
  std::string validation_start;
  std::string test_start;
  std::string out_dir = "out";

  // Pattern library and segmentation.
  bool use_sipr = true;
  std::size_t k = 4;
  std::size_t l_min = 16;
  std::size_t l_max = 32;
  std::size_t cluster_stride = 8;
  std::size_t max_iter = 20;
  double tol = 1e-6;
  std::size_t dba_iterations = 5;
  std::string dtw_metric = "absolute";
  std::string dtw_weights = "volatility";
  std::size_t volatility_window = 4;
  std::size_t band_radius = 0;  // 0: unconstrained

  // Patching.
  std::size_t window_length = 64;
  std::size_t patch_length = 16;
  std::size_t patch_stride = 8;
  bool drop_boundary_crossing = false;
  std::size_t sample_stride = 1;

  // Wavelets.
  std::string wavelet = "db4";
  std::size_t levels = 2;
  bool wavelet_trainable = true;
  bool freeze_filters = false;
  bool shared_filters = false;

  // Training.
  std::size_t model_dim = 16;
  double learning_rate = 0.05;
  std::size_t pretrain_epochs = 2;
  std::size_t epochs = 8;
  std::size_t batch_size = 32;
  std::string loss_mode = "joint";
  double filter_penalty = 0.0;

  // Backtest.
  std::size_t top_k = 3;
  int periods_per_year = 252;
  double risk_free = 0.0;
  std::string benchmark = "zero";  // zero | equal

  unsigned long long seed = 7;

  std::filesystem::path artifact(std::string_view name) const {
    return std::filesystem::path(out_dir) / std::string(name);
  }
};

/// Every recognized key.
const std::vector<std::string>& config_keys();

/// Sets one field. Keys may use '-' in place of '_'. Throws ConfigError.
void set_value(RunConfig& config, std::string_view key, std::string_view value);

/// Parses the text format into `config`. Errors name the line.
void parse_config_text(RunConfig& config, std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical `key = value` listing of every field.
std::string format_config(const RunConfig& config);

/// Checks every field against the preconditions of the modules that use it.
/// Throws ConfigError naming the field.
void validate(const RunConfig& config);

}  // namespace fts::cli
