#include "fts/serialization.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fts/error.h"
#include "json.hpp"

namespace fts {

using nlohmann::json;

namespace {

json header(std::string_view format) {
  json j;
  j["format"] = format;
  j["version"] = kArtifactVersion;
  return j;
}

json parse_checked(std::string_view text, std::string_view format) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string(format) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != format) {
    throw DataError("expected a '" + std::string(format) + "' document");
  }
  if (j.value("version", -1) != kArtifactVersion) {
    throw DataError(std::string(format) + ": unsupported version " +
                    j.value("version", json(-1)).dump());
  }
  return j;
}

template <typename F>
auto guarded(std::string_view format, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw DataError(std::string(format) + ": malformed field: " + e.what());
  }
}

json matrix_json(const Matrix& m) {
  return json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

Matrix matrix_from(const json& j, std::size_t rows, std::size_t cols, const char* name) {
  Matrix m;
  m.rows = j.at("rows").get<std::size_t>();
  m.cols = j.at("cols").get<std::size_t>();
  m.data = j.at("data").get<std::vector<double>>();
  if (m.rows != rows || m.cols != cols || m.data.size() != rows * cols) {
    throw DataError(std::string("checkpoint: block '") + name + "' has the wrong shape");
  }
  return m;
}

json ratio_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double ratio_from(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw DataError("metrics: unexpected string value '" + s + "'");
  }
  return j.get<double>();
}

json dtw_json(const DtwOptions& o) {
  json j{{"local_metric", o.local_metric == LocalMetric::absolute ? "absolute" : "squared"},
         {"weight_mode", o.weight_mode == WeightMode::uniform ? "uniform" : "volatility"},
         {"volatility_window", o.volatility_window},
         {"symmetric_weights", o.symmetric_weights}};
  j["band_radius"] = o.band_radius ? json(*o.band_radius) : json(nullptr);
  return j;
}

DtwOptions dtw_from(const json& j) {
  DtwOptions o;
  const auto metric = j.at("local_metric").get<std::string>();
  if (metric != "absolute" && metric != "squared") {
    throw DataError("library: unknown local metric '" + metric + "'");
  }
  o.local_metric = metric == "absolute" ? LocalMetric::absolute : LocalMetric::squared;
  const auto mode = j.at("weight_mode").get<std::string>();
  if (mode != "uniform" && mode != "volatility") {
    throw DataError("library: unknown weight mode '" + mode + "'");
  }
  o.weight_mode = mode == "uniform" ? WeightMode::uniform : WeightMode::volatility;
  o.volatility_window = j.at("volatility_window").get<std::size_t>();
  o.symmetric_weights = j.at("symmetric_weights").get<bool>();
  if (!j.at("band_radius").is_null()) o.band_radius = j.at("band_radius").get<std::size_t>();
  return o;
}

json filters_json(const FilterBank& bank) {
  json j{{"levels", bank.levels}, {"taps", bank.taps()}, {"shared", bank.shared}};
  json pairs = json::array();
  for (const auto& f : bank.pairs) pairs.push_back({{"h", f.h}, {"g", f.g}});
  j["pairs"] = pairs;
  return j;
}

FilterBank filters_from(const json& j) {
  FilterBank bank;
  bank.levels = j.at("levels").get<std::size_t>();
  bank.shared = j.at("shared").get<bool>();
  const auto taps = j.at("taps").get<std::size_t>();
  for (const auto& p : j.at("pairs")) {
    FilterPair f{p.at("h").get<std::vector<double>>(), p.at("g").get<std::vector<double>>()};
    if (f.h.size() != taps || f.g.size() != taps) {
      throw DataError("filters: pair has " + std::to_string(f.h.size()) + "/" +
                      std::to_string(f.g.size()) + " taps, expected " + std::to_string(taps));
    }
    bank.pairs.push_back(std::move(f));
  }
  if (bank.pairs.empty() || (bank.shared && bank.pairs.size() != 1)) {
    throw DataError("filters: shared banks hold one pair, others at least one");
  }
  return bank;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot write '" + path.string() + "': " + ec.message());
}

std::string library_to_json(const PatternLibrary& library) {
  json j = header("pattern_library");
  j["k"] = library.k;
  j["l_min"] = library.l_min;
  j["l_max"] = library.l_max;
  j["inertia"] = library.inertia;
  j["dtw"] = dtw_json(library.options);
  j["centroids"] = library.centroids;
  j["inertia_trace"] = library.inertia_trace;
  return j.dump(2) + "\n";
}

PatternLibrary library_from_json(std::string_view text) {
  const json j = parse_checked(text, "pattern_library");
  return guarded("pattern_library", [&] {
    PatternLibrary lib;
    lib.k = j.at("k").get<std::size_t>();
    lib.l_min = j.at("l_min").get<std::size_t>();
    lib.l_max = j.at("l_max").get<std::size_t>();
    lib.inertia = j.at("inertia").get<double>();
    lib.options = dtw_from(j.at("dtw"));
    lib.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    lib.inertia_trace = j.value("inertia_trace", std::vector<double>{});
    if (lib.centroids.size() != lib.k || lib.k == 0) {
      throw DataError("pattern_library: expected " + std::to_string(lib.k) + " centroids");
    }
    if (lib.l_min == 0 || lib.l_min > lib.l_max) {
      throw DataError("pattern_library: invalid length range");
    }
    for (const auto& c : lib.centroids) {
      if (c.empty()) throw DataError("pattern_library: empty centroid");
    }
    return lib;
  });
}

std::string filters_to_json(const FilterBank& bank) {
  json j = header("filter_bank");
  j.update(filters_json(bank));
  return j.dump(2) + "\n";
}

FilterBank filters_from_json(std::string_view text) {
  const json j = parse_checked(text, "filter_bank");
  return guarded("filter_bank", [&] { return filters_from(j); });
}

std::string segmentation_to_json(const std::vector<std::string>& symbols,
                                 const std::vector<Segmentation>& segmentations) {
  if (symbols.size() != segmentations.size()) {
    throw ArgumentError("segmentation_to_json: one symbol per segmentation");
  }
  json j = header("segmentation");
  json series = json::array();
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const auto& s = segmentations[i];
    series.push_back({{"symbol", symbols[i]},
                      {"boundaries", s.boundaries},
                      {"lengths", s.lengths},
                      {"assignments", s.assignments},
                      {"distances", s.distances},
                      {"remainder_merged", s.remainder_merged}});
  }
  j["series"] = series;
  return j.dump(2) + "\n";
}

std::vector<Segmentation> segmentation_from_json(std::string_view text,
                                                 std::vector<std::string>* symbols) {
  const json j = parse_checked(text, "segmentation");
  return guarded("segmentation", [&] {
    std::vector<Segmentation> out;
    if (symbols) symbols->clear();
    for (const auto& s : j.at("series")) {
      Segmentation seg;
      seg.boundaries = s.at("boundaries").get<std::vector<std::size_t>>();
      seg.lengths = s.at("lengths").get<std::vector<std::size_t>>();
      seg.assignments = s.at("assignments").get<std::vector<std::size_t>>();
      seg.distances = s.at("distances").get<std::vector<double>>();
      seg.remainder_merged = s.at("remainder_merged").get<bool>();
      if (seg.lengths.size() != seg.boundaries.size() ||
          seg.assignments.size() != seg.boundaries.size() ||
          seg.distances.size() != seg.boundaries.size()) {
        throw DataError("segmentation: field lengths disagree");
      }
      if (symbols) symbols->push_back(s.at("symbol").get<std::string>());
      out.push_back(std::move(seg));
    }
    return out;
  });
}

std::string checkpoint_to_json(const TrainState& state) {
  const auto& p = state.params;
  json j = header("predictor_checkpoint");
  j["dims"] = {{"patch_length", p.dims.patch_length},
               {"levels", p.dims.levels},
               {"model_dim", p.dims.model_dim}};
  j["weights"] = {{"embed_w", matrix_json(p.embed_w)},   {"embed_b", matrix_json(p.embed_b)},
                  {"query_w", matrix_json(p.query_w)},   {"key_w", matrix_json(p.key_w)},
                  {"value_w", matrix_json(p.value_w)},   {"output_w", matrix_json(p.output_w)},
                  {"head_w", matrix_json(p.head_w)},     {"head_b", matrix_json(p.head_b)},
                  {"score_w", matrix_json(p.score_w)},   {"score_b", p.score_b}};
  json cond = json::array();
  for (const auto& m : p.head_cond) cond.push_back(matrix_json(m));
  j["weights"]["head_cond"] = cond;
  j["filters"] = filters_json(state.filters);
  j["pretrain_epochs_done"] = state.pretrain_done;
  j["epochs_done"] = state.finetune_done;
  json trace = json::array();
  for (const auto& t : state.trace) {
    trace.push_back({{"epoch", t.epoch}, {"stage", t.stage}, {"loss", t.loss}});
  }
  j["trace"] = trace;
  return j.dump(1) + "\n";
}

TrainState checkpoint_from_json(std::string_view text) {
  const json j = parse_checked(text, "predictor_checkpoint");
  return guarded("predictor_checkpoint", [&] {
    PredictorDims dims;
    dims.patch_length = j.at("dims").at("patch_length").get<std::size_t>();
    dims.levels = j.at("dims").at("levels").get<std::size_t>();
    dims.model_dim = j.at("dims").at("model_dim").get<std::size_t>();
    TrainState state;
    state.params = PredictorParams::zeros(dims);
    auto& p = state.params;
    const auto& w = j.at("weights");
    const std::size_t d = dims.model_dim;
    const std::size_t pl = dims.patch_length;
    p.embed_w = matrix_from(w.at("embed_w"), d, dims.token_dim(), "embed_w");
    p.embed_b = matrix_from(w.at("embed_b"), 1, d, "embed_b");
    p.query_w = matrix_from(w.at("query_w"), d, d, "query_w");
    p.key_w = matrix_from(w.at("key_w"), d, d, "key_w");
    p.value_w = matrix_from(w.at("value_w"), d, d, "value_w");
    p.output_w = matrix_from(w.at("output_w"), d, d, "output_w");
    p.head_w = matrix_from(w.at("head_w"), pl, d, "head_w");
    p.head_b = matrix_from(w.at("head_b"), 1, pl, "head_b");
    p.score_w = matrix_from(w.at("score_w"), 1, d, "score_w");
    p.score_b = w.at("score_b").get<double>();
    const auto& cond = w.at("head_cond");
    if (cond.size() != kDescriptorDim) throw DataError("checkpoint: head_cond count");
    for (std::size_t r = 0; r < kDescriptorDim; ++r) {
      p.head_cond[r] = matrix_from(cond[r], pl, d, "head_cond");
    }
    state.filters = filters_from(j.at("filters"));
    if (state.filters.levels != dims.levels) {
      throw DataError("checkpoint: filter levels differ from model levels");
    }
    state.pretrain_done = j.at("pretrain_epochs_done").get<std::size_t>();
    state.finetune_done = j.at("epochs_done").get<std::size_t>();
    for (const auto& t : j.at("trace")) {
      state.trace.push_back({t.at("epoch").get<std::size_t>(), t.at("stage").get<int>(),
                             t.at("loss").get<double>()});
    }
    if (!p.all_finite()) throw DataError("checkpoint: non-finite weights");
    return state;
  });
}

std::string metrics_to_json(const MetricsReport& r) {
  json j = header("metrics_report");
  j["arr"] = r.arr;
  j["avol"] = r.avol;
  j["mdd"] = r.mdd;
  j["asr"] = ratio_json(r.asr);
  j["cr"] = ratio_json(r.cr);
  j["ir"] = ratio_json(r.ir);
  j["trading_days_per_year"] = r.trading_days_per_year;
  j["days"] = r.days;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(std::string_view text) {
  const json j = parse_checked(text, "metrics_report");
  return guarded("metrics_report", [&] {
    MetricsReport r;
    r.arr = j.at("arr").get<double>();
    r.avol = j.at("avol").get<double>();
    r.mdd = j.at("mdd").get<double>();
    r.asr = ratio_from(j.at("asr"));
    r.cr = ratio_from(j.at("cr"));
    r.ir = ratio_from(j.at("ir"));
    r.trading_days_per_year = j.at("trading_days_per_year").get<int>();
    r.days = j.at("days").get<std::size_t>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  });
}

std::string trace_to_csv(const std::vector<TraceEntry>& trace) {
  std::string out = "epoch,stage,loss\n";
  for (const auto& t : trace) {
    const json loss = t.loss;  // shortest round-trip formatting
    out += std::to_string(t.epoch) + "," + std::to_string(t.stage) + "," + loss.dump() + "\n";
  }
  return out;
}

}  // namespace fts
