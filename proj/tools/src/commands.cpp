#include "fts_cli/commands.h"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include "fts/error.h"
#include "fts/log.h"
#include "fts/panel.h"
#include "fts/predictor.h"
#include "fts/serialization.h"
#include "fts/sipr.h"
#include "fts/swt.h"
#include "fts/synthetic.h"
#include "json.hpp"

namespace fts::cli {

namespace {

struct Workspace {
  StockPanel raw;
  StockPanel normalized;  // every feature, train-window statistics
  StockPanel features;    // model inputs
  ReturnLabels labels;
  std::size_t validation_begin = 0;
  std::size_t test_begin = 0;
  std::size_t index_feature = 0;
};

Workspace prepare(const RunConfig& config) {
  validate(config);
  Workspace ws;
  ws.raw = load_panel(config.panel);
  const Date v = parse_date(config.validation_start);
  const Date s = parse_date(config.test_start);
  (void)chronological_split(ws.raw, v, s);
  ws.validation_begin = ws.raw.lower_bound(v);
  ws.test_begin = ws.raw.lower_bound(s);
  const auto& cal = ws.raw.calendar();
  ws.normalized = normalize(ws.raw, DateRange{cal.front(), cal[ws.validation_begin - 1]});
  ws.features = config.model_features.empty()
                    ? ws.normalized
                    : ws.normalized.select_features(config.model_features);
  ws.labels = compute_labels(ws.raw, config.price_feature);
  ws.index_feature = ws.normalized.feature_index(config.index_feature);
  if (config.top_k > ws.raw.num_stocks()) {
    throw ConfigError("'top_k' is " + std::to_string(config.top_k) + " but the panel has " +
                      std::to_string(ws.raw.num_stocks()) + " stocks");
  }
  if (ws.validation_begin < config.window_length + 1) {
    throw ConfigError("training split holds " + std::to_string(ws.validation_begin) +
                      " days, fewer than 'window_length' + 1");
  }
  return ws;
}

DtwOptions dtw_options(const RunConfig& c) {
  DtwOptions o;
  o.local_metric = c.dtw_metric == "squared" ? LocalMetric::squared : LocalMetric::absolute;
  o.weight_mode = c.dtw_weights == "uniform" ? WeightMode::uniform : WeightMode::volatility;
  o.volatility_window = c.volatility_window;
  if (c.band_radius != 0) o.band_radius = c.band_radius;
  return o;
}

PipelineOptions pipeline_options(const RunConfig& c) {
  PipelineOptions o;
  o.window_length = c.window_length;
  o.patch.patch_length = c.patch_length;
  o.patch.stride = c.patch_stride;
  o.patch.drop_boundary_crossing = c.drop_boundary_crossing;
  o.use_segments = c.use_sipr;
  o.sample_stride = c.sample_stride;
  return o;
}

std::size_t basis_taps(WaveletBasis b) { return b == WaveletBasis::haar ? 2 : 8; }

FilterBank initial_filters(const RunConfig& c, std::size_t features) {
  const auto basis = parse_basis(c.wavelet);
  return FilterBank::make(basis, basis_taps(basis), c.levels, features, c.shared_filters);
}

void check_bank(const FilterBank& bank, std::size_t features, std::size_t levels,
                const std::string& origin) {
  if (bank.levels != levels) {
    throw DataError(origin + ": filter bank has " + std::to_string(bank.levels) +
                    " levels, the model uses " + std::to_string(levels));
  }
  if (!bank.shared && bank.pairs.size() != features) {
    throw DataError(origin + ": filter bank has " + std::to_string(bank.pairs.size()) +
                    " per-feature pairs for " + std::to_string(features) + " features");
  }
}

std::vector<Segmentation> segment_all(const Workspace& ws, const PatternLibrary& library) {
  std::vector<Segmentation> out;
  for (std::size_t b = 0; b < ws.normalized.num_stocks(); ++b) {
    out.push_back(segment_series(ws.normalized.series(b, ws.index_feature), library));
  }
  return out;
}

std::vector<StockSegments> load_segments(const RunConfig& config, const Workspace& ws) {
  if (!config.use_sipr) return {};
  const auto seg_path = config.artifact("segmentation.json");
  const auto lib_path = config.artifact("library.json");
  if (!std::filesystem::exists(lib_path)) {
    throw DataError("pattern library '" + lib_path.string() +
                    "' not found; run `fts cluster` first or pass --no-sipr");
  }
  const auto library = library_from_json(read_text_file(lib_path));
  std::vector<Segmentation> segs;
  if (std::filesystem::exists(seg_path)) {
    std::vector<std::string> symbols;
    segs = segmentation_from_json(read_text_file(seg_path), &symbols);
    if (symbols != ws.raw.symbols()) {
      throw DataError("segmentation '" + seg_path.string() +
                      "' was built for different symbols; rerun `fts segment`");
    }
  } else {
    log::info("segmentation file absent; segmenting in memory");
    segs = segment_all(ws, library);
  }
  std::vector<StockSegments> out;
  for (auto& s : segs) out.push_back({std::move(s), library.l_max});
  return out;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.learning_rate = c.learning_rate;
  t.pretrain_epochs = c.pretrain_epochs;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.seed = c.seed;
  t.wavelet_trainable = c.wavelet_trainable;
  t.freeze_filters = c.freeze_filters;
  t.loss_mode = parse_loss_mode(c.loss_mode);
  t.filter_penalty = c.filter_penalty;
  return t;
}

PredictorDims model_dims(const RunConfig& c) {
  return PredictorDims{c.patch_length, c.levels, c.model_dim};
}

std::string number(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void cmd_cluster(const RunConfig& config) {
  const Workspace ws = prepare(config);
  const std::size_t n = ws.validation_begin;
  std::vector<double> index(n, 0.0);
  for (std::size_t b = 0; b < ws.normalized.num_stocks(); ++b) {
    const auto s = ws.normalized.series(b, ws.index_feature);
    for (std::size_t t = 0; t < n; ++t) index[t] += s[t];
  }
  for (double& v : index) v /= static_cast<double>(ws.normalized.num_stocks());

  const auto segments = harvest_segments(index, config.l_min, config.l_max, config.cluster_stride);
  if (segments.size() < config.k) {
    throw DataError("training range yields " + std::to_string(segments.size()) +
                    " segments, fewer than k = " + std::to_string(config.k));
  }
  ClusterConfig cc;
  cc.k = config.k;
  cc.l_min = config.l_min;
  cc.l_max = config.l_max;
  cc.stride = config.cluster_stride;
  cc.max_iter = config.max_iter;
  cc.tol = config.tol;
  cc.dba_iterations = config.dba_iterations;
  cc.seed = config.seed;
  cc.dtw = dtw_options(config);
  const auto library = kmeans_cluster(segments, cc);
  const auto path = config.artifact("library.json");
  write_text_file(path, library_to_json(library));
  std::cout << "library: k=" << library.k << " segments=" << segments.size()
            << " iterations=" << library.inertia_trace.size() - 1
            << " inertia=" << number(library.inertia) << " -> " << path.string() << "\n";
}

void cmd_segment(const RunConfig& config) {
  const Workspace ws = prepare(config);
  const auto lib_path = config.artifact("library.json");
  const auto library = library_from_json(read_text_file(lib_path));
  const auto segs = segment_all(ws, library);
  const auto path = config.artifact("segmentation.json");
  write_text_file(path, segmentation_to_json(ws.raw.symbols(), segs));
  std::size_t total = 0;
  for (const auto& s : segs) total += s.boundaries.size();
  std::cout << "segmentation: stocks=" << segs.size() << " segments=" << total << " -> "
            << path.string() << "\n";
}

void cmd_tokenize(const RunConfig& config, std::optional<std::string> day) {
  const Workspace ws = prepare(config);
  const std::size_t days = ws.features.num_days();
  std::size_t t = days - 1;
  if (day) {
    const Date d = parse_date(*day);
    t = ws.features.lower_bound(d);
    if (t == days || ws.features.calendar()[t] != d) {
      throw ConfigError("'day' " + *day + " is not a trading day of the panel");
    }
  }
  if (t + 1 < config.window_length) {
    throw ConfigError("'day' has no full look-back window of " +
                      std::to_string(config.window_length));
  }
  FilterBank bank = initial_filters(config, ws.features.num_features());
  const auto filters_path = config.artifact("filters.json");
  if (std::filesystem::exists(filters_path)) {
    bank = filters_from_json(read_text_file(filters_path));
    check_bank(bank, ws.features.num_features(), config.levels, filters_path.string());
  }
  const auto window = ws.features.window(t + 1 - config.window_length, t + 1);
  const Array4 tokens = tokenize_window(window, bank);
  nlohmann::json j;
  j["format"] = "tokens";
  j["version"] = kArtifactVersion;
  j["date"] = format_date(ws.features.calendar()[t]);
  j["symbols"] = ws.features.symbols();
  j["features"] = ws.features.feature_names();
  j["shape"] = {tokens.stocks, tokens.features, tokens.length, tokens.planes};
  j["data"] = tokens.data;
  const auto path = config.artifact("tokens.json");
  write_text_file(path, j.dump() + "\n");
  std::cout << "tokens: " << tokens.stocks << "x" << tokens.features << "x" << tokens.length
            << "x" << tokens.planes << " -> " << path.string() << "\n";
}

void cmd_train(const RunConfig& config, bool resume) {
  const Workspace ws = prepare(config);
  const auto segments = load_segments(config, ws);
  const auto pipeline = pipeline_options(config);
  const Dataset train_set = make_dataset(ws.features, ws.labels, segments, pipeline, 0,
                                         ws.validation_begin - 2);
  const Dataset val_set = make_dataset(ws.features, ws.labels, segments, pipeline,
                                       ws.validation_begin, ws.test_begin - 2);
  if (train_set.samples.empty()) throw DataError("training split yields no samples");

  const auto ckpt_path = config.artifact("checkpoint.json");
  TrainState state;
  if (resume) {
    state = checkpoint_from_json(read_text_file(ckpt_path));
    const auto& d = state.params.dims;
    if (d.patch_length != config.patch_length || d.levels != config.levels ||
        d.model_dim != config.model_dim) {
      throw ConfigError("checkpoint '" + ckpt_path.string() +
                        "' dimensions differ from patch_length/levels/model_dim");
    }
    check_bank(state.filters, ws.features.num_features(), config.levels, ckpt_path.string());
  } else {
    state = initial_state(model_dims(config), initial_filters(config, ws.features.num_features()),
                          config.seed);
  }
  const TrainConfig tc = train_config(config);
  const auto before = evaluate(train_set, state.params, state.filters, tc.loss_mode);
  state = train(train_set, std::move(state), tc);
  const auto after = evaluate(train_set, state.params, state.filters, tc.loss_mode);

  write_text_file(ckpt_path, checkpoint_to_json(state));
  write_text_file(config.artifact("filters.json"), filters_to_json(state.filters));
  write_text_file(config.artifact("trace.csv"), trace_to_csv(state.trace));
  std::cout << "train: samples=" << train_set.samples.size()
            << " loss_initial=" << number(before.loss) << " loss_final=" << number(after.loss);
  if (!val_set.samples.empty()) {
    const auto val = evaluate(val_set, state.params, state.filters, tc.loss_mode);
    std::cout << " validation_loss=" << number(val.loss)
              << " validation_next_patch=" << number(val.next_patch);
  }
  std::cout << " -> " << ckpt_path.string() << "\n";
}

Scorer parse_scorer(const std::string& name) {
  if (name == "model") return Scorer::model;
  if (name == "oracle") return Scorer::oracle;
  if (name == "equal") return Scorer::equal;
  throw ConfigError("'scorer' must be one of model|oracle|equal, got '" + name + "'");
}

MetricsReport cmd_backtest(const RunConfig& config, const BacktestRequest& request) {
  const Workspace ws = prepare(config);
  const std::size_t last = ws.labels.width() - 1;
  if (ws.test_begin > last) throw DataError("test split has no labelled days");
  std::vector<Date> dates;
  for (std::size_t t = ws.test_begin; t <= last; ++t) dates.push_back(ws.labels.dates[t]);
  if (dates.size() < 2) throw DataError("test split needs at least 2 labelled days");

  const EquityCurve baseline = equal_weight_curve(ws.labels, dates);
  ScoreTable scores;
  std::string name = "equal_weight";
  EquityCurve curve;
  if (request.scorer == Scorer::equal) {
    curve = baseline;
  } else {
    if (request.scorer == Scorer::oracle) {
      name = "oracle";
      for (std::size_t t = ws.test_begin; t <= last; ++t) {
        auto& row = scores.days[ws.labels.dates[t]];
        for (std::size_t b = 0; b < ws.labels.num_stocks; ++b) row.push_back(ws.labels.at(b, t));
      }
    } else {
      name = "model";
      const auto ckpt_path = request.checkpoint.value_or(config.artifact("checkpoint.json"));
      TrainState state = checkpoint_from_json(read_text_file(ckpt_path));
      if (request.filters) {
        state.filters = filters_from_json(read_text_file(*request.filters));
        check_bank(state.filters, ws.features.num_features(), state.params.dims.levels,
                   request.filters->string());
      } else {
        check_bank(state.filters, ws.features.num_features(), state.params.dims.levels,
                   ckpt_path.string());
      }
      if (state.params.dims.patch_length != config.patch_length) {
        throw ConfigError("'patch_length' differs from the checkpoint");
      }
      const auto segments = load_segments(config, ws);
      const auto pipeline = pipeline_options(config);
      for (std::size_t t = ws.test_begin; t <= last; ++t) {
        const Dataset windows = make_day_windows(ws.features, segments, pipeline, t);
        scores.days[ws.labels.dates[t]] = predict_scores(windows, state.params, state.filters);
      }
    }
    curve = topk_backtest(scores, ws.labels, dates, BacktestOptions{config.top_k, 0.0});
  }

  MetricsOptions mo;
  mo.periods_per_year = config.periods_per_year;
  mo.risk_free_daily = config.risk_free;
  if (config.benchmark == "equal") mo.benchmark = baseline.daily_returns;
  const MetricsReport report = compute_metrics(curve, mo);
  const MetricsReport base_report = compute_metrics(baseline, mo);

  write_text_file(config.artifact("metrics.json"), metrics_to_json(report));
  const auto ranking = compare_reports(name, report, {"equal_weight"}, {base_report});
  write_text_file(config.artifact("metrics.txt"),
                  format_metrics_table(ranking.names, ranking.reports) + "\n" +
                      format_ranking_table(ranking));
  if (!scores.days.empty()) {
    std::string csv = "date,symbol,score\n";
    for (const auto& [date, row] : scores.days) {
      for (std::size_t b = 0; b < row.size(); ++b) {
        csv += format_date(date) + "," + ws.labels.symbols[b] + "," + number(row[b]) + "\n";
      }
    }
    write_text_file(config.artifact("scores.csv"), csv);
  }
  std::cout << format_metrics_table(ranking.names, ranking.reports);
  return report;
}

std::string cmd_report(const std::vector<std::filesystem::path>& paths) {
  if (paths.empty()) throw ConfigError("report needs at least one metrics file");
  std::vector<std::string> names;
  std::vector<MetricsReport> reports;
  for (const auto& p : paths) {
    names.push_back(p.string());
    reports.push_back(metrics_from_json(read_text_file(p)));
  }
  const auto ranking = compare_reports(
      names.front(), reports.front(), std::vector<std::string>(names.begin() + 1, names.end()),
      std::vector<MetricsReport>(reports.begin() + 1, reports.end()));
  return format_metrics_table(names, reports) + "\n" + format_ranking_table(ranking);
}

void cmd_synth(const SynthRequest& request) {
  if (request.out.empty()) throw ConfigError("'out' is required");
  StockPanel panel;
  if (request.kind == "motif") {
    MotifPanelOptions o;
    o.stocks = request.stocks;
    o.days = request.days;
    panel = planted_motif_panel(request.seed, o);
  } else if (request.kind == "wavelet") {
    WaveletPanelOptions o;
    o.stocks = request.stocks;
    o.days = request.days;
    panel = planted_wavelet_panel(request.seed, o);
  } else {
    throw ConfigError("'kind' must be motif or wavelet, got '" + request.kind + "'");
  }
  write_panel(panel, request.out);
  std::cout << "synth: " << request.kind << " stocks=" << panel.num_stocks()
            << " days=" << panel.num_days() << " -> " << request.out.string() << "\n";
}

}  // namespace fts::cli
