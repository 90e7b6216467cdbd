#include "fts/predictor.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fts/error.h"
#include "fts/log.h"

namespace fts {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstView = Eigen::Map<const RowMat>;
using View = Eigen::Map<RowMat>;

ConstView view(const Matrix& m) {
  return ConstView(m.data.data(), static_cast<Eigen::Index>(m.rows),
                   static_cast<Eigen::Index>(m.cols));
}
View view(Matrix& m) {
  return View(m.data.data(), static_cast<Eigen::Index>(m.rows),
              static_cast<Eigen::Index>(m.cols));
}

struct Cache {
  RowMat embedded;  // E
  RowMat query, key, value;
  RowMat attention;  // alpha, lower triangular
  RowMat context;
  RowMat hidden;  // H = E + context * Wo^T
};

void check_inputs(const Matrix& tokens, const Matrix& descriptors,
                  const PredictorParams& p) {
  if (tokens.rows == 0) throw ArgumentError("predictor: need at least one token");
  if (tokens.cols != p.dims.token_dim()) {
    throw ArgumentError("predictor: token width " + std::to_string(tokens.cols) +
                        " != " + std::to_string(p.dims.token_dim()));
  }
  if (descriptors.rows != tokens.rows || descriptors.cols != kDescriptorDim) {
    throw ArgumentError("predictor: descriptor shape mismatch");
  }
}

void run_forward(const Matrix& tokens, const Matrix& descriptors,
                 const PredictorParams& p, Cache& c, ForwardOutput& out) {
  check_inputs(tokens, descriptors, p);
  const auto n = static_cast<Eigen::Index>(tokens.rows);
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.dims.model_dim));

  c.embedded.noalias() = view(tokens).lazyProduct(view(p.embed_w).transpose());
  c.embedded.rowwise() += view(p.embed_b).row(0);
  c.query.noalias() = c.embedded.lazyProduct(view(p.query_w).transpose());
  c.key.noalias() = c.embedded.lazyProduct(view(p.key_w).transpose());
  c.value.noalias() = c.embedded.lazyProduct(view(p.value_w).transpose());

  c.attention.setZero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j <= k; ++j) {
      const double s = scale * c.query.row(k).dot(c.key.row(j));
      c.attention(k, j) = s;
      peak = std::max(peak, s);
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j <= k; ++j) {
      const double e = std::exp(c.attention(k, j) - peak);
      c.attention(k, j) = e;
      total += e;
    }
    for (Eigen::Index j = 0; j <= k; ++j) c.attention(k, j) /= total;
  }
  c.context.noalias() = c.attention.lazyProduct(c.value);
  c.hidden = c.embedded;
  c.hidden.noalias() += c.context.lazyProduct(view(p.output_w).transpose());

  out.next_patch = Matrix(tokens.rows, p.dims.patch_length);
  View next = view(out.next_patch);
  next.noalias() = c.hidden.lazyProduct(view(p.head_w).transpose());
  next.rowwise() += view(p.head_b).row(0);
  const ConstView desc = view(descriptors);
  RowMat cond;
  for (std::size_t r = 0; r < kDescriptorDim; ++r) {
    const auto col = desc.col(static_cast<Eigen::Index>(r));
    if (col.isZero()) continue;
    cond.noalias() = c.hidden.lazyProduct(view(p.head_cond[r]).transpose());
    next.noalias() += col.asDiagonal() * cond;
  }
  out.scores.resize(tokens.rows);
  Eigen::Map<Eigen::VectorXd> scores(out.scores.data(), n);
  scores.noalias() = c.hidden.lazyProduct(view(p.score_w).row(0).transpose());
  scores.array() += p.score_b;
}

double sample_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

void fill_normal(Matrix& m, double sd, std::mt19937_64& rng) {
  for (double& v : m.data) v = sd * sample_normal(rng);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 over the combined key
  std::uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xBF58476D1CE4E5B9ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void add_scaled(PredictorParams& dst, const PredictorParams& src, double alpha) {
  auto d = dst.blocks();
  const auto s = src.blocks();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d[i]->data.size(); ++j) {
      d[i]->data[j] += alpha * s[i]->data[j];
    }
  }
  dst.score_b += alpha * src.score_b;
}

std::size_t count_pairs(const WindowSample& sample) {
  std::size_t n = 0;
  for (const auto& ch : sample.channels) {
    if (ch.patches.size() >= 2) n += ch.patches.size() - 1;
  }
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------

PredictorParams PredictorParams::zeros(const PredictorDims& dims) {
  if (dims.patch_length == 0 || dims.levels == 0 || dims.model_dim == 0) {
    throw ArgumentError("predictor: dimensions must be positive");
  }
  const std::size_t d = dims.model_dim;
  const std::size_t p = dims.patch_length;
  PredictorParams out;
  out.dims = dims;
  out.embed_w = Matrix(d, dims.token_dim());
  out.embed_b = Matrix(1, d);
  out.query_w = Matrix(d, d);
  out.key_w = Matrix(d, d);
  out.value_w = Matrix(d, d);
  out.output_w = Matrix(d, d);
  out.head_w = Matrix(p, d);
  out.head_b = Matrix(1, p);
  out.head_cond.assign(kDescriptorDim, Matrix(p, d));
  out.score_w = Matrix(1, d);
  out.score_b = 0.0;
  return out;
}

PredictorParams PredictorParams::random(const PredictorDims& dims,
                                        std::uint64_t seed) {
  PredictorParams out = zeros(dims);
  std::mt19937_64 rng(seed);
  const double inv_d = 1.0 / std::sqrt(static_cast<double>(dims.model_dim));
  fill_normal(out.embed_w, 1.0 / std::sqrt(static_cast<double>(dims.token_dim())), rng);
  fill_normal(out.query_w, inv_d, rng);
  fill_normal(out.key_w, inv_d, rng);
  fill_normal(out.value_w, inv_d, rng);
  fill_normal(out.output_w, inv_d, rng);
  fill_normal(out.head_w, inv_d, rng);
  fill_normal(out.score_w, inv_d, rng);
  return out;
}

std::vector<Matrix*> PredictorParams::blocks() {
  std::vector<Matrix*> out{&embed_w, &embed_b, &query_w, &key_w, &value_w,
                           &output_w, &head_w,  &head_b};
  for (auto& m : head_cond) out.push_back(&m);
  out.push_back(&score_w);
  return out;
}

std::vector<const Matrix*> PredictorParams::blocks() const {
  std::vector<const Matrix*> out{&embed_w, &embed_b, &query_w, &key_w, &value_w,
                                 &output_w, &head_w,  &head_b};
  for (const auto& m : head_cond) out.push_back(&m);
  out.push_back(&score_w);
  return out;
}

bool PredictorParams::all_finite() const {
  for (const Matrix* m : blocks()) {
    for (double v : m->data) {
      if (!std::isfinite(v)) return false;
    }
  }
  return std::isfinite(score_b);
}

ForwardOutput forward(const Matrix& tokens, const Matrix& descriptors,
                      const PredictorParams& params) {
  Cache cache;
  ForwardOutput out;
  run_forward(tokens, descriptors, params, cache, out);
  return out;
}

ForwardOutput forward(const Matrix& tokens, const PredictorParams& params) {
  return forward(tokens, Matrix(tokens.rows, kDescriptorDim), params);
}

namespace {

// Adds the parameter gradients into `g` and writes the token gradient.
void run_backward(const Matrix& tokens, const Matrix& descriptors, const PredictorParams& p,
                  const Cache& c, const Matrix& dnext, std::span<const double> dscores,
                  PredictorParams& g, Matrix& grad_tokens) {
  const auto n = static_cast<Eigen::Index>(tokens.rows);
  if (dnext.rows != tokens.rows || dnext.cols != p.dims.patch_length ||
      dscores.size() != tokens.rows) {
    throw ArgumentError("predictor backward: upstream shape mismatch");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(p.dims.model_dim));
  const ConstView dy = view(dnext);
  const ConstView desc = view(descriptors);
  const Eigen::Map<const Eigen::VectorXd> ds(dscores.data(), n);

  // Heads.
  RowMat d_hidden = dy.lazyProduct(view(p.head_w));
  view(g.head_w).noalias() += dy.transpose().lazyProduct(c.hidden);
  view(g.head_b).row(0) += dy.colwise().sum();
  RowMat gated;
  for (std::size_t r = 0; r < kDescriptorDim; ++r) {
    const auto col = desc.col(static_cast<Eigen::Index>(r));
    if (col.isZero()) continue;
    gated.noalias() = col.asDiagonal() * dy;
    view(g.head_cond[r]).noalias() += gated.transpose().lazyProduct(c.hidden);
    d_hidden.noalias() += gated.lazyProduct(view(p.head_cond[r]));
  }
  d_hidden.noalias() += ds * view(p.score_w).row(0);
  view(g.score_w).row(0).noalias() += ds.transpose() * c.hidden;
  g.score_b += ds.sum();

  // Residual and output projection.
  RowMat d_embedded = d_hidden;
  view(g.output_w).noalias() += d_hidden.transpose().lazyProduct(c.context);
  const RowMat d_context = d_hidden.lazyProduct(view(p.output_w));

  // Attention.
  const RowMat d_attention = d_context.lazyProduct(c.value.transpose());
  const RowMat d_value = c.attention.transpose().lazyProduct(d_context);
  RowMat d_logits = RowMat::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double inner = 0.0;
    for (Eigen::Index j = 0; j <= k; ++j) inner += d_attention(k, j) * c.attention(k, j);
    for (Eigen::Index j = 0; j <= k; ++j) {
      d_logits(k, j) = scale * c.attention(k, j) * (d_attention(k, j) - inner);
    }
  }
  const RowMat d_query = d_logits.lazyProduct(c.key);
  const RowMat d_key = d_logits.transpose().lazyProduct(c.query);

  view(g.query_w).noalias() += d_query.transpose().lazyProduct(c.embedded);
  view(g.key_w).noalias() += d_key.transpose().lazyProduct(c.embedded);
  view(g.value_w).noalias() += d_value.transpose().lazyProduct(c.embedded);
  d_embedded.noalias() += d_query.lazyProduct(view(p.query_w));
  d_embedded.noalias() += d_key.lazyProduct(view(p.key_w));
  d_embedded.noalias() += d_value.lazyProduct(view(p.value_w));

  // Embedding.
  view(g.embed_w).noalias() += d_embedded.transpose().lazyProduct(view(tokens));
  view(g.embed_b).row(0) += d_embedded.colwise().sum();
  grad_tokens = Matrix(tokens.rows, tokens.cols);
  view(grad_tokens).noalias() = d_embedded.lazyProduct(view(p.embed_w));
}

}  // namespace

BackwardResult backward(const Matrix& tokens, const Matrix& descriptors,
                        const PredictorParams& p, const Matrix& dnext,
                        std::span<const double> dscores) {
  Cache c;
  ForwardOutput fwd;
  run_forward(tokens, descriptors, p, c, fwd);
  BackwardResult out{PredictorParams::zeros(p.dims), Matrix()};
  run_backward(tokens, descriptors, p, c, dnext, dscores, out.grads, out.grad_tokens);
  return out;
}

double next_patch_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.size() != targets.size()) {
    throw ArgumentError("next_patch_loss: shape mismatch");
  }
  if (preds.empty()) throw ArgumentError("next_patch_loss: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double d = preds[i] - targets[i];
    total += d * d;
  }
  return total / static_cast<double>(preds.size());
}

Matrix build_tokens(const PatchSet& patches, const FilterPair& filters,
                    std::size_t levels) {
  const std::size_t p = patches.patch_length;
  const std::size_t planes = levels + 1;
  Matrix out(patches.size(), p * planes + planes);
  const double inv_p = 1.0 / static_cast<double>(p);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto coeffs = swt_forward(patches.patch(k), filters, levels);
    for (std::size_t s = 0; s < planes; ++s) {
      const auto& level = s < levels ? coeffs.detail[s] : coeffs.approx;
      double energy = 0.0;
      for (std::size_t t = 0; t < p; ++t) {
        out(k, s * p + t) = level[t];
        energy += level[t] * level[t];
      }
      out(k, p * planes + s) = energy * inv_p;
    }
  }
  return out;
}

void token_filter_gradients(const PatchSet& patches, const FilterPair& filters,
                            std::size_t levels, const Matrix& grad_tokens,
                            std::vector<double>& grad_h, std::vector<double>& grad_g) {
  const std::size_t p = patches.patch_length;
  const std::size_t planes = levels + 1;
  const double two_over_p = 2.0 / static_cast<double>(p);
  grad_h.resize(filters.taps(), 0.0);
  grad_g.resize(filters.taps(), 0.0);
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const auto x = patches.patch(k);
    const auto coeffs = swt_forward(x, filters, levels);
    SwtCoefficients upstream = SwtCoefficients::zeros(p, levels);
    for (std::size_t s = 0; s < planes; ++s) {
      const auto& level = s < levels ? coeffs.detail[s] : coeffs.approx;
      auto& up = s < levels ? upstream.detail[s] : upstream.approx;
      const double d_energy = grad_tokens(k, p * planes + s);
      for (std::size_t t = 0; t < p; ++t) {
        up[t] = grad_tokens(k, s * p + t) + d_energy * two_over_p * level[t];
      }
    }
    const auto grads = swt_backward(x, filters, levels, upstream);
    for (std::size_t i = 0; i < filters.taps(); ++i) {
      grad_h[i] += grads.grad_h[i];
      grad_g[i] += grads.grad_g[i];
    }
  }
}

Matrix build_descriptors(const PatchSet& patches) {
  Matrix out(patches.size(), kDescriptorDim);
  const double inv_p = 1.0 / static_cast<double>(patches.patch_length);
  for (std::size_t k = 0; k + 1 < patches.size(); ++k) {
    out(k, 0) = static_cast<double>(patches.positions[k + 1] - patches.positions[k]) * inv_p;
    out(k, 1) = patches.origins[k + 1] == PatchOrigin::segment ? 1.0 : 0.0;
    out(k, 2) = patches.origins[k] == PatchOrigin::segment ? 1.0 : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> causal_boundaries(const Segmentation& segmentation,
                                           std::size_t end, std::size_t l_max) {
  std::vector<std::size_t> out;
  const auto& b = segmentation.boundaries;
  if (b.empty()) return out;
  out.push_back(b[0]);
  for (std::size_t j = 0; j + 1 < b.size(); ++j) {
    if (b[j] + l_max <= end) {
      out.push_back(b[j + 1]);
    } else {
      break;
    }
  }
  return out;
}

namespace {

WindowSample build_window(const StockPanel& features,
                          const std::vector<StockSegments>& segments,
                          const PipelineOptions& options, std::size_t stock,
                          std::size_t day) {
  const std::size_t length = options.window_length;
  const std::size_t start = day + 1 - length;
  std::vector<std::size_t> boundaries;
  if (options.use_segments && !segments.empty()) {
    const auto& seg = segments.at(stock);
    boundaries = causal_boundaries(seg.segmentation, day + 1, seg.l_max);
  }
  const auto points = extraction_points(std::span<const std::size_t>(boundaries), start,
                                        length, options.patch);
  WindowSample sample;
  sample.stock = stock;
  sample.day = day;
  for (std::size_t m = 0; m < features.num_features(); ++m) {
    const auto series = features.series(stock, m).subspan(start, length);
    sample.channels.push_back(
        {m, extract_patches(series, points, options.patch.patch_length,
                            stock * features.num_features() + m)});
  }
  return sample;
}

void check_pipeline(const StockPanel& features,
                    const std::vector<StockSegments>& segments,
                    const PipelineOptions& options) {
  if (options.window_length < options.patch.patch_length) {
    throw ArgumentError("window length shorter than patch length");
  }
  if (options.sample_stride == 0) throw ArgumentError("sample stride must be positive");
  if (!segments.empty() && segments.size() != features.num_stocks()) {
    throw ArgumentError("need one segmentation per stock");
  }
}

}  // namespace

Dataset make_dataset(const StockPanel& features, const ReturnLabels& labels,
                     const std::vector<StockSegments>& segments,
                     const PipelineOptions& options, std::size_t day_begin,
                     std::size_t day_end) {
  check_pipeline(features, segments, options);
  if (labels.num_stocks != features.num_stocks()) {
    throw ArgumentError("labels and features disagree on stock count");
  }
  Dataset out;
  out.num_features = features.num_features();
  const std::size_t first = std::max(day_begin, options.window_length - 1);
  const std::size_t last = std::min(day_end, labels.width() - 1);
  const std::size_t n_stocks = features.num_stocks();
  for (std::size_t day = first; day <= last && day < labels.width();
       day += options.sample_stride) {
    double mean = 0.0;
    for (std::size_t b = 0; b < n_stocks; ++b) mean += labels.at(b, day);
    mean /= static_cast<double>(n_stocks);
    double var = 0.0;
    for (std::size_t b = 0; b < n_stocks; ++b) {
      var += (labels.at(b, day) - mean) * (labels.at(b, day) - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(n_stocks));
    for (std::size_t b = 0; b < n_stocks; ++b) {
      WindowSample sample = build_window(features, segments, options, b, day);
      sample.raw_return = labels.at(b, day);
      sample.target = sd > 1e-12 ? (sample.raw_return - mean) / sd : sample.raw_return;
      out.samples.push_back(std::move(sample));
    }
  }
  return out;
}

Dataset make_day_windows(const StockPanel& features,
                         const std::vector<StockSegments>& segments,
                         const PipelineOptions& options, std::size_t day) {
  check_pipeline(features, segments, options);
  if (day + 1 < options.window_length || day >= features.num_days()) {
    throw ArgumentError("day " + std::to_string(day) +
                        " has no full look-back window of " +
                        std::to_string(options.window_length));
  }
  Dataset out;
  out.num_features = features.num_features();
  for (std::size_t b = 0; b < features.num_stocks(); ++b) {
    out.samples.push_back(build_window(features, segments, options, b, day));
  }
  return out;
}

LossMode parse_loss_mode(std::string_view name) {
  if (name == "next_patch") return LossMode::next_patch;
  if (name == "score") return LossMode::score;
  if (name == "joint") return LossMode::joint;
  throw ArgumentError("unknown loss mode '" + std::string(name) + "'");
}

std::string_view loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::next_patch:
      return "next_patch";
    case LossMode::score:
      return "score";
    case LossMode::joint:
      return "joint";
  }
  return "score";
}

BatchGradient batch_gradient(const Dataset& data, std::span<const std::size_t> batch,
                             const PredictorParams& params, const FilterBank& filters,
                             LossMode mode, double filter_penalty, bool filter_gradients) {
  if (batch.empty()) throw ArgumentError("batch_gradient: empty batch");
  const std::size_t levels = params.dims.levels;
  const std::size_t p = params.dims.patch_length;
  const double w_next = mode == LossMode::score ? 0.0 : (mode == LossMode::joint ? 0.5 : 1.0);
  const double w_score = mode == LossMode::next_patch ? 0.0 : (mode == LossMode::joint ? 0.5 : 1.0);

  std::size_t total_pairs = 0;
  for (std::size_t idx : batch) total_pairs += count_pairs(data.samples.at(idx));
  const double next_norm =
      total_pairs == 0 ? 0.0 : 1.0 / static_cast<double>(total_pairs * p);
  const double score_norm = 1.0 / static_cast<double>(batch.size());

  BatchGradient out;
  out.grads = PredictorParams::zeros(params.dims);
  out.filter_grads.assign(filters.pairs.size(), FilterPair{});
  for (auto& f : out.filter_grads) {
    f.h.assign(filters.taps(), 0.0);
    f.g.assign(filters.taps(), 0.0);
  }

  double next_sum = 0.0;
  double score_sum = 0.0;
  Matrix grad_tokens;
  for (std::size_t idx : batch) {
    const WindowSample& sample = data.samples.at(idx);
    const double inv_channels = 1.0 / static_cast<double>(sample.channels.size());
    struct Pass {
      Matrix tokens, descriptors;
      Cache cache;
      ForwardOutput out;
    };
    std::vector<Pass> passes;
    passes.reserve(sample.channels.size());
    double score = 0.0;
    for (const auto& ch : sample.channels) {
      Pass pass;
      pass.tokens = build_tokens(ch.patches, filters.for_feature(ch.feature), levels);
      pass.descriptors = build_descriptors(ch.patches);
      run_forward(pass.tokens, pass.descriptors, params, pass.cache, pass.out);
      score += pass.out.scores.back() * inv_channels;
      passes.push_back(std::move(pass));
    }
    const double score_err = score - sample.target;
    score_sum += score_err * score_err;

    for (std::size_t c = 0; c < sample.channels.size(); ++c) {
      const auto& ch = sample.channels[c];
      Pass& pass = passes[c];
      const std::size_t n = ch.patches.size();
      Matrix dnext(n, p);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const auto target = ch.patches.patch(k + 1);
        for (std::size_t j = 0; j < p; ++j) {
          const double d = pass.out.next_patch(k, j) - target[j];
          next_sum += d * d;
          dnext(k, j) = w_next * next_norm * 2.0 * d;
        }
      }
      std::vector<double> dscores(n, 0.0);
      dscores.back() = w_score * score_norm * 2.0 * score_err * inv_channels;
      if (w_next == 0.0 && w_score == 0.0) continue;
      run_backward(pass.tokens, pass.descriptors, params, pass.cache, dnext, dscores,
                   out.grads, grad_tokens);
      if (!filter_gradients) continue;
      const std::size_t pair_index = filters.shared ? 0 : ch.feature;
      token_filter_gradients(ch.patches, filters.for_feature(ch.feature), levels,
                             grad_tokens, out.filter_grads[pair_index].h,
                             out.filter_grads[pair_index].g);
    }
  }
  out.objective.next_patch = next_sum * next_norm;
  out.objective.score = score_sum * score_norm;
  out.objective.loss = w_next * out.objective.next_patch + w_score * out.objective.score;

  if (filter_penalty > 0.0) {
    for (std::size_t i = 0; i < filters.pairs.size(); ++i) {
      const auto& f = filters.pairs[i];
      const double sum_h = std::accumulate(f.h.begin(), f.h.end(), 0.0) - M_SQRT2;
      const double sum_g = std::accumulate(f.g.begin(), f.g.end(), 0.0);
      out.objective.loss += filter_penalty * (sum_h * sum_h + sum_g * sum_g);
      for (auto& v : out.filter_grads[i].h) v += 2.0 * filter_penalty * sum_h;
      for (auto& v : out.filter_grads[i].g) v += 2.0 * filter_penalty * sum_g;
    }
  }
  return out;
}

Objective evaluate(const Dataset& data, const PredictorParams& params,
                   const FilterBank& filters, LossMode mode) {
  if (data.samples.empty()) throw ArgumentError("evaluate: empty dataset");
  const std::size_t levels = params.dims.levels;
  const std::size_t p = params.dims.patch_length;
  double next_sum = 0.0;
  double score_sum = 0.0;
  std::size_t pairs = 0;
  for (const auto& sample : data.samples) {
    double score = 0.0;
    for (const auto& ch : sample.channels) {
      const Matrix tokens = build_tokens(ch.patches, filters.for_feature(ch.feature), levels);
      const auto out = forward(tokens, build_descriptors(ch.patches), params);
      score += out.scores.back() / static_cast<double>(sample.channels.size());
      for (std::size_t k = 0; k + 1 < ch.patches.size(); ++k) {
        const auto target = ch.patches.patch(k + 1);
        for (std::size_t j = 0; j < p; ++j) {
          const double d = out.next_patch(k, j) - target[j];
          next_sum += d * d;
        }
        ++pairs;
      }
    }
    score_sum += (score - sample.target) * (score - sample.target);
  }
  Objective obj;
  obj.next_patch = pairs == 0 ? 0.0 : next_sum / static_cast<double>(pairs * p);
  obj.score = score_sum / static_cast<double>(data.samples.size());
  switch (mode) {
    case LossMode::next_patch:
      obj.loss = obj.next_patch;
      break;
    case LossMode::score:
      obj.loss = obj.score;
      break;
    case LossMode::joint:
      obj.loss = 0.5 * obj.next_patch + 0.5 * obj.score;
      break;
  }
  return obj;
}

TrainState initial_state(const PredictorDims& dims, const FilterBank& filters,
                         std::uint64_t seed) {
  if (filters.levels != dims.levels) {
    throw ArgumentError("filter bank levels differ from predictor levels");
  }
  TrainState state;
  state.params = PredictorParams::random(dims, mix_seed(seed, 0, 0));
  state.filters = filters;
  return state;
}

TrainState train(const Dataset& data, TrainState state, const TrainConfig& config) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw ArgumentError("learning rate must be finite and non-negative");
  }
  if (config.batch_size == 0) throw ArgumentError("batch size must be positive");
  if (data.samples.empty()) throw ArgumentError("train: empty training set");
  if (state.filters.levels != state.params.dims.levels) {
    throw ArgumentError("train: filter levels differ from predictor levels");
  }
  {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : data.samples) {
      lo = std::min(lo, s.target);
      hi = std::max(hi, s.target);
    }
    if (lo == hi) log::warn("train: targets are constant; score objective is degenerate");
  }

  for (int stage = 1; stage <= 2; ++stage) {
    const std::size_t total = stage == 1 ? config.pretrain_epochs : config.epochs;
    std::size_t& done = stage == 1 ? state.pretrain_done : state.finetune_done;
    const LossMode mode = stage == 1 ? LossMode::next_patch : config.loss_mode;
    const bool filters_trainable =
        !config.freeze_filters && (stage == 2 || config.wavelet_trainable);
    for (std::size_t epoch = done + 1; epoch <= total; ++epoch) {
      std::vector<std::size_t> order(data.samples.size());
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(stage), epoch));
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
      }
      for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
        const std::size_t end = std::min(order.size(), begin + config.batch_size);
        const std::span<const std::size_t> batch(order.data() + begin, end - begin);
        const auto g = batch_gradient(data, batch, state.params, state.filters, mode,
                                      filters_trainable ? config.filter_penalty : 0.0,
                                      filters_trainable);
        add_scaled(state.params, g.grads, -config.learning_rate);
        if (filters_trainable) {
          for (std::size_t i = 0; i < state.filters.pairs.size(); ++i) {
            auto& f = state.filters.pairs[i];
            for (std::size_t j = 0; j < f.taps(); ++j) {
              f.h[j] -= config.learning_rate * g.filter_grads[i].h[j];
              f.g[j] -= config.learning_rate * g.filter_grads[i].g[j];
            }
          }
        }
      }
      if (!state.params.all_finite()) {
        throw NumericError("train: parameters diverged at stage " +
                           std::to_string(stage) + " epoch " + std::to_string(epoch));
      }
      const double loss = evaluate(data, state.params, state.filters, mode).loss;
      state.trace.push_back({epoch, stage, loss});
      done = epoch;
      log::info("stage " + std::to_string(stage) + " epoch " + std::to_string(epoch) +
                " loss " + std::to_string(loss));
    }
  }
  return state;
}

std::vector<double> predict_scores(const Dataset& windows,
                                   const PredictorParams& params,
                                   const FilterBank& filters) {
  std::vector<double> out;
  out.reserve(windows.samples.size());
  for (const auto& sample : windows.samples) {
    double score = 0.0;
    for (const auto& ch : sample.channels) {
      const Matrix tokens =
          build_tokens(ch.patches, filters.for_feature(ch.feature), params.dims.levels);
      score += forward(tokens, build_descriptors(ch.patches), params).scores.back();
    }
    out.push_back(score / static_cast<double>(sample.channels.size()));
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i + 1;
    while (j < idx.size() && v[idx[j]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j - 1);
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = r;
    i = j;
  }
  return ranks;
}

}  // namespace

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ArgumentError("rank_correlation: need two equal-length inputs of size >= 2");
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n - 1.0) / 2.0;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace fts
