#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "sybillab/graph.hpp"
#include "sybillab/rng.hpp"
#include "sybillab/scores.hpp"

namespace sybillab {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct GatHyper {
  int input_width = 1;   // 1: sybil-ness channel, 2: (honest, sybil) channels
  int hidden_width = 4;
  int output_width = 1;  // 1: sigmoid, 2: softmax
  int heads = 4;
  int layers = 2;
  double dropout = 0.5;
  double leaky_slope = 0.2;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int max_epochs = 500;
  int patience = 30;
  double train_val_split = 0.8;  // training phase: fit / early-stopping validation
  double inference_split = 0.9;  // prediction phase: input / threshold validation
  std::uint64_t seed = 42;

  void validate() const;
  friend bool operator==(const GatHyper&, const GatHyper&) = default;
};

/// Shape of one attention layer and where its tensors live in the flat
/// parameter vector: weight [heads][in][out], att_src [heads][out],
/// att_dst [heads][out], bias [heads * out].
struct GatLayerShape {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t heads = 0;
  std::size_t weight_offset = 0;
  std::size_t att_src_offset = 0;
  std::size_t att_dst_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t width() const { return heads * out_dim; }
  std::size_t parameter_count() const { return heads * in_dim * out_dim + 3 * heads * out_dim; }
  friend bool operator==(const GatLayerShape&, const GatLayerShape&) = default;
};

class GatModel {
 public:
  GatModel() = default;

  /// Layer 1: I -> Hw with N heads; middle: Hw*N -> Hw with N heads;
  /// last: Hw*N -> O with one head (a single layer maps I -> O).
  static std::vector<GatLayerShape> architecture(const GatHyper& hyper);

  /// Glorot-uniform weights and attention vectors, zero bias.
  static GatModel initialize(const GatHyper& hyper, Rng& rng);
  /// All parameters zero.
  static GatModel zeros(const GatHyper& hyper);
  /// Throws InvalidArgument if params does not match the architecture.
  static GatModel from_parameters(const GatHyper& hyper, std::vector<double> params);

  const GatHyper& hyper() const { return hyper_; }
  const std::vector<GatLayerShape>& layers() const { return layers_; }
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Throws if layer shapes disagree with hyper or the parameter count.
  void check_shape() const;

  friend bool operator==(const GatModel&, const GatModel&) = default;

 private:
  GatHyper hyper_;
  std::vector<GatLayerShape> layers_;
  std::vector<double> params_;
};

/// Neighborhoods N(i) ∪ {i}, sorted, in CSR form.
class AttentionGraph {
 public:
  explicit AttentionGraph(const Graph& g);
  std::size_t node_count() const { return offsets_.size() - 1; }
  std::size_t entry_count() const { return index_.size(); }
  std::size_t begin(NodeId i) const { return offsets_[i]; }
  std::size_t end(NodeId i) const { return offsets_[i + 1]; }
  NodeId source(std::size_t entry) const { return index_[entry]; }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> index_;
};

/// Input encoding of known labels: I=1 -> sybil 1, honest 0, unknown 0.5;
/// I=2 -> honest (1,0), sybil (0,1), unknown (0.5,0.5).
Matrix node_features(std::size_t n, const TrainSplit& known, int input_width);

/// Intermediates of one layer, kept for the backward pass.
struct LayerCache {
  Matrix input;               // after dropout
  Matrix dropout_scale;       // per-element factor applied to the raw input; empty if none
  Matrix z;                   // n x heads*out
  std::vector<double> logit;  // entry*heads + h, before LeakyReLU
  std::vector<double> alpha;  // entry*heads + h
  Matrix output;              // after activation
};

struct ForwardOptions {
  bool training = false;  // enables dropout
  Rng* rng = nullptr;     // dropout stream, required when training
};

/// One attention layer. tanh follows every layer except the last.
Matrix gat_layer_forward(const GatModel& model, std::size_t layer, const AttentionGraph& graph, const Matrix& x,
                         const ForwardOptions& options, LayerCache* cache = nullptr);

/// Raw output logits (n x O). When caches is non-null it receives one entry per layer.
Matrix gat_forward_logits(const GatModel& model, const AttentionGraph& graph, const Matrix& x,
                          const ForwardOptions& options, std::vector<LayerCache>* caches = nullptr);

/// Per-node Sybil probability: sigmoid (O=1) or Sybil-channel softmax (O=2).
ScoreVector model_forward(const GatModel& model, const Graph& g, const Matrix& x, const ForwardOptions& options = {});
ScoreVector squash_logits(const Matrix& logits);

/// Mean binary cross entropy (O=1) or cross entropy (O=2) over `nodes`.
/// Fills dlogits (same shape as logits) when non-null.
double classification_loss(const Matrix& logits, std::span<const NodeId> nodes, std::span<const Label> targets,
                           Matrix* dlogits = nullptr);

/// Loss and full flat gradient for one pass.
double loss_and_gradient(const GatModel& model, const AttentionGraph& graph, const Matrix& x,
                         std::span<const NodeId> nodes, std::span<const Label> targets, const ForwardOptions& options,
                         std::vector<double>& gradient);

/// Adaptive moment estimation over a flat parameter vector.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon);
  void step(std::span<double> params, std::span<const double> gradient);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long step_ = 0;
};

/// Patience-based early stopping on a validation loss sequence (epochs 1-based).
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}
  /// Returns true when `loss` improves on the best seen so far.
  bool update(int epoch, double loss);
  bool should_stop() const { return epochs_without_improvement_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
  int epochs_without_improvement_ = 0;
};

struct TrainReport {
  std::vector<double> train_loss;       // per epoch (with dropout)
  std::vector<double> validation_loss;  // per epoch
  double initial_train_loss = 0.0;      // before the first update, no dropout
  int best_epoch = 0;
  int epochs_run = 0;
  bool stopped_early = false;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  std::vector<NodeId> fit_nodes;         // 0.8 share: input features and loss
  std::vector<NodeId> validation_nodes;  // 0.2 share: early stopping
};

struct TrainedModel {
  GatModel model;
  TrainReport report;
};

/// Class-stratified split of the known nodes; each class keeps >= 1 node on both sides.
std::pair<TrainSplit, TrainSplit> stratified_split(const TrainSplit& known, double first_fraction, Rng& rng);

/// Full-graph training with early stopping on the known nodes of `split`.
/// Needs >= 2 known nodes per class.
TrainedModel train_gat(const Graph& g, const TrainSplit& split, const GatHyper& hyper);

/// Threshold maximizing Youden's J over cuts between consecutive distinct
/// scores (plus one below and one above all). Ties resolve toward 0.5, then
/// toward the smaller cut. Returns 0.5 when a class is missing.
double estimate_threshold(std::span<const double> scores, std::span<const Label> labels);

std::vector<Label> apply_threshold(const ScoreVector& scores, double threshold);

/// Forward pass without dropout using `known` as input features.
ScoreVector predict_scores(const GatModel& model, const Graph& g, const TrainSplit& known);

struct Prediction {
  ScoreVector scores;
  std::vector<Label> labels;
  double threshold = 0.5;
  TrainSplit input_known;       // inference_split share, encoded in features
  TrainSplit threshold_known;   // remainder, used for the threshold
};

/// Inference phase: holds out (1 - inference_split) of the known nodes for
/// threshold estimation, predicts with the rest as input.
Prediction predict(const GatModel& model, const Graph& g, const TrainSplit& known, std::uint64_t seed);

/// Checkpoint container (versioned JSON; layout in docs/checkpoint-format.md).
void save_checkpoint(const GatModel& model, double threshold, const std::filesystem::path& path);
struct Checkpoint {
  GatModel model;
  double threshold = 0.5;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sybillab
