#include <algorithm>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fts/error.h"
#include "fts/log.h"
#include "fts_cli/commands.h"
#include "fts_cli/config.h"

namespace {

using fts::cli::RunConfig;

struct CommonArgs {
  std::string config_path;
  bool no_sipr = false;
  std::string fixed_wavelet;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.config_path, "Run configuration file");
  sub->add_flag("--no-sipr", args.no_sipr, "Stride-only patching, no pattern library");
  sub->add_option("--fixed-wavelet", args.fixed_wavelet, "Freeze filters at haar or db4")
      ->check(CLI::IsMember({"haar", "db4"}));
  sub->allow_extras();
  sub->footer("Any config key can be overridden with --key value.");
}

RunConfig resolve(const CLI::App* sub, const CommonArgs& args) {
  RunConfig config = args.config_path.empty() ? RunConfig{} : fts::cli::load_config(args.config_path);
  const std::vector<std::string> extras = sub->remaining();
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() == 2) {
      throw fts::ConfigError("unexpected argument '" + tok + "'");
    }
    const std::string body = tok.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      fts::cli::set_value(config, body.substr(0, eq), body.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw fts::ConfigError("override '" + tok + "' needs a value");
      fts::cli::set_value(config, body, extras[++i]);
    }
  }
  if (args.no_sipr) config.use_sipr = false;
  if (!args.fixed_wavelet.empty()) {
    config.wavelet = args.fixed_wavelet;
    config.freeze_filters = true;
    config.wavelet_trainable = false;
  }
  return config;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int report_error(std::string_view code, int exit_code, const std::string& msg) {
  std::cerr << "error: code=" << code << " exit=" << exit_code << " msg=" << one_line(msg)
            << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pattern-aware wavelet patch models for cross-sectional stock ranking"};
  app.require_subcommand(1);
  CommonArgs common;

  auto* cluster = app.add_subcommand("cluster", "Fit the pattern library on the training range");
  auto* segment = app.add_subcommand("segment", "Segment every stock with the pattern library");
  auto* tokenize = app.add_subcommand("tokenize", "Wavelet tokens of one day's look-back windows");
  auto* train = app.add_subcommand("train", "Two-stage predictor training");
  auto* backtest = app.add_subcommand("backtest", "Top-K backtest on the test split");
  auto* report = app.add_subcommand("report", "Compare saved metrics reports");
  auto* synth = app.add_subcommand("synth", "Write a synthetic panel CSV");
  for (auto* sub : {cluster, segment, tokenize, train, backtest}) add_common(sub, common);

  std::optional<std::string> day;
  tokenize->add_option("--day", day, "Window end date (YYYY-MM-DD)");
  bool resume = false;
  train->add_flag("--resume", resume, "Continue from the checkpoint in out_dir");
  std::string scorer = "model";
  std::string filters_path;
  std::string checkpoint_path;
  backtest->add_option("--scorer", scorer, "model, oracle or equal")
      ->check(CLI::IsMember({"model", "oracle", "equal"}));
  backtest->add_option("--filters", filters_path, "Filter bank file from another run");
  backtest->add_option("--checkpoint", checkpoint_path, "Checkpoint file (default out_dir)");
  std::vector<std::string> report_files;
  report->add_option("files", report_files, "metrics.json files; the first is the candidate")
      ->required();
  fts::cli::SynthRequest synth_req;
  synth->add_option("--kind", synth_req.kind, "motif or wavelet")
      ->check(CLI::IsMember({"motif", "wavelet"}));
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output CSV path")->required();
  synth->add_option("--seed", synth_req.seed, "Random seed");
  synth->add_option("--stocks", synth_req.stocks, "Number of stocks")->check(CLI::PositiveNumber);
  synth->add_option("--days", synth_req.days, "Number of trading days")->check(CLI::Range(2, 100000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("CONFIG_ERROR", 2, e.what());
  }

  try {
    if (cluster->parsed()) {
      fts::cli::cmd_cluster(resolve(cluster, common));
    } else if (segment->parsed()) {
      fts::cli::cmd_segment(resolve(segment, common));
    } else if (tokenize->parsed()) {
      fts::cli::cmd_tokenize(resolve(tokenize, common), day);
    } else if (train->parsed()) {
      fts::cli::cmd_train(resolve(train, common), resume);
    } else if (backtest->parsed()) {
      fts::cli::BacktestRequest req;
      req.scorer = fts::cli::parse_scorer(scorer);
      if (!filters_path.empty()) req.filters = filters_path;
      if (!checkpoint_path.empty()) req.checkpoint = checkpoint_path;
      fts::cli::cmd_backtest(resolve(backtest, common), req);
    } else if (report->parsed()) {
      std::vector<std::filesystem::path> paths(report_files.begin(), report_files.end());
      std::cout << fts::cli::cmd_report(paths);
    } else if (synth->parsed()) {
      synth_req.out = synth_out;
      fts::cli::cmd_synth(synth_req);
    }
  } catch (const fts::Error& e) {
    return report_error(fts::error_code_name(e.kind()), fts::exit_code_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error("INTERNAL_ERROR", 1, e.what());
  }
  return 0;
}
