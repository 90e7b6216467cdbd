#pragma once

// Desk-scale next-patch predictor and cross-sectional scorer.
//
// Each univariate channel of a look-back window is cut into patches at the
// extraction points, every patch is wavelet-tokenized independently, and the
// token sequence runs through one causal single-head attention block with a
// residual connection. Two linear heads read the hidden state: a next-patch
// head (conditioned on a descriptor of where the next patch starts) and a
// scalar score head. Gradients are written out by hand and flow back into the
// wavelet filters.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fts/panel.h"
#include "fts/patcher.h"
#include "fts/sipr.h"
#include "fts/swt.h"

namespace fts {

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

/// Descriptor of the point a next-patch prediction targets:
/// [gap / P, target is a segment point, source is a segment point].
inline constexpr std::size_t kDescriptorDim = 3;

struct PredictorDims {
  std::size_t patch_length = 16;
  std::size_t levels = 2;
  std::size_t model_dim = 16;

  /// P * (S+1) flattened coefficients plus one mean-square energy per level.
  std::size_t token_dim() const { return patch_length * (levels + 1) + levels + 1; }
};

struct PredictorParams {
  PredictorDims dims;
  Matrix embed_w;  // D x F
  Matrix embed_b;  // 1 x D
  Matrix query_w, key_w, value_w, output_w;  // D x D
  Matrix head_w;   // P x D
  Matrix head_b;   // 1 x P
  std::vector<Matrix> head_cond;  // kDescriptorDim x (P x D)
  Matrix score_w;  // 1 x D
  double score_b = 0.0;

  static PredictorParams zeros(const PredictorDims& dims);
  static PredictorParams random(const PredictorDims& dims, std::uint64_t seed);

  /// Every weight block in a fixed order (score_b excluded).
  std::vector<Matrix*> blocks();
  std::vector<const Matrix*> blocks() const;
  bool all_finite() const;
};

struct ForwardOutput {
  Matrix next_patch;            // N x P
  std::vector<double> scores;   // N
};

/// tokens: N x token_dim; descriptors: N x kDescriptorDim (row k describes
/// the target of the prediction made at k).
ForwardOutput forward(const Matrix& tokens, const Matrix& descriptors,
                      const PredictorParams& params);
/// Same with all-zero descriptors.
ForwardOutput forward(const Matrix& tokens, const PredictorParams& params);

struct BackwardResult {
  PredictorParams grads;
  Matrix grad_tokens;  // N x token_dim
};

/// Gradients of sum(dnext .* next_patch) + sum(dscores .* scores).
BackwardResult backward(const Matrix& tokens, const Matrix& descriptors,
                        const PredictorParams& params, const Matrix& dnext,
                        std::span<const double> dscores);

/// Mean squared error over all elements.
double next_patch_loss(std::span<const double> preds, std::span<const double> targets);

/// Token matrix (N x token_dim) of a patch set under one filter pair.
Matrix build_tokens(const PatchSet& patches, const FilterPair& filters,
                    std::size_t levels);
/// Chain rule from token gradients into the filter taps.
void token_filter_gradients(const PatchSet& patches, const FilterPair& filters,
                            std::size_t levels, const Matrix& grad_tokens,
                            std::vector<double>& grad_h, std::vector<double>& grad_g);
Matrix build_descriptors(const PatchSet& patches);

// ---------------------------------------------------------------------------
// Dataset construction and training.

struct PipelineOptions {
  std::size_t window_length = 64;
  PatchOptions patch;
  /// Merge causal segmentation boundaries into the extraction points.
  bool use_segments = true;
  /// Only sample every n-th day as a window end.
  std::size_t sample_stride = 1;
};

/// Boundaries of a full-series segmentation that are already determined by
/// data strictly before `end` (exclusive): boundary b[j+1] is kept when
/// b[j] + l_max <= end. The first boundary is always kept.
std::vector<std::size_t> causal_boundaries(const Segmentation& segmentation,
                                           std::size_t end, std::size_t l_max);

struct StockSegments {
  Segmentation segmentation;
  std::size_t l_max = 0;
};

struct ChannelSample {
  std::size_t feature = 0;
  PatchSet patches;
};

struct WindowSample {
  std::size_t stock = 0;
  std::size_t day = 0;  // index of the last day in the window
  double target = 0.0;  // cross-sectionally standardized next-day return
  double raw_return = 0.0;
  std::vector<ChannelSample> channels;
};

struct Dataset {
  std::size_t num_features = 0;
  std::vector<WindowSample> samples;
};

/// One sample per (stock, window end day) with end days in
/// [day_begin, day_end], clipped to days with a full window and a label.
/// `segments` is empty or holds one entry per stock, in panel coordinates.
Dataset make_dataset(const StockPanel& features, const ReturnLabels& labels,
                     const std::vector<StockSegments>& segments,
                     const PipelineOptions& options, std::size_t day_begin,
                     std::size_t day_end);

/// Windows ending at `day` for every stock, without labels.
Dataset make_day_windows(const StockPanel& features,
                         const std::vector<StockSegments>& segments,
                         const PipelineOptions& options, std::size_t day);

enum class LossMode { next_patch, score, joint };
LossMode parse_loss_mode(std::string_view name);
std::string_view loss_mode_name(LossMode mode);

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t pretrain_epochs = 0;  // stage 1: next-patch objective
  std::size_t epochs = 10;          // stage 2: `loss_mode` objective
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  /// Let stage 1 update the filters as well.
  bool wavelet_trainable = false;
  /// Keep the filters fixed in both stages.
  bool freeze_filters = false;
  LossMode loss_mode = LossMode::score;
  /// Weight of (sum h - sqrt 2)^2 + (sum g)^2, summed over filter pairs.
  double filter_penalty = 0.0;
};

struct TraceEntry {
  std::size_t epoch = 0;  // 1-based within its stage
  int stage = 1;
  double loss = 0.0;
};

struct TrainState {
  PredictorParams params;
  FilterBank filters;
  std::size_t pretrain_done = 0;
  std::size_t finetune_done = 0;
  std::vector<TraceEntry> trace;
};

/// Fresh state: random parameters from the config seed.
TrainState initial_state(const PredictorDims& dims, const FilterBank& filters,
                         std::uint64_t seed);

/// Runs the remaining epochs of both stages from `state`. Shuffling for epoch
/// e of stage s depends only on (seed, s, e), so a resumed run reproduces the
/// uninterrupted trace.
TrainState train(const Dataset& data, TrainState state, const TrainConfig& config);

struct Objective {
  double loss = 0.0;
  double next_patch = 0.0;
  double score = 0.0;
};

/// Loss on a set of samples under `mode` (penalty excluded).
Objective evaluate(const Dataset& data, const PredictorParams& params,
                   const FilterBank& filters, LossMode mode);

/// Full objective and its gradient over a batch; exposed for gradient checks.
struct BatchGradient {
  Objective objective;
  PredictorParams grads;
  std::vector<FilterPair> filter_grads;
};
/// With `filter_gradients` false the filter gradients are left at zero.
BatchGradient batch_gradient(const Dataset& data, std::span<const std::size_t> batch,
                             const PredictorParams& params, const FilterBank& filters,
                             LossMode mode, double filter_penalty,
                             bool filter_gradients = true);

/// Mean over the stock's channels of the score at the final patch.
std::vector<double> predict_scores(const Dataset& windows,
                                   const PredictorParams& params,
                                   const FilterBank& filters);

/// Spearman rank correlation with average ranks for ties.
double rank_correlation(std::span<const double> a, std::span<const double> b);

}  // namespace fts
