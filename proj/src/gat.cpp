#include "sybillab/gat.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "sybillab/config_json.hpp"
#include "sybillab/error.hpp"

namespace sybillab {

void GatHyper::validate() const {
  if (input_width != 1 && input_width != 2) throw InvalidArgument("input_width must be 1 or 2");
  if (output_width != 1 && output_width != 2) throw InvalidArgument("output_width must be 1 or 2");
  if (hidden_width < 1 || heads < 1 || layers < 1) throw InvalidArgument("widths, heads and layers must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout rate must lie in [0, 1)");
  if (!(leaky_slope >= 0.0 && leaky_slope <= 1.0)) throw InvalidArgument("leaky slope must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (max_epochs < 1 || patience < 1) throw InvalidArgument("max_epochs and patience must be >= 1");
  if (!(train_val_split > 0.0 && train_val_split < 1.0)) throw InvalidArgument("train_val_split must lie in (0, 1)");
  if (!(inference_split > 0.0 && inference_split <= 1.0)) {
    throw InvalidArgument("inference_split must lie in (0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Model shape

std::vector<GatLayerShape> GatModel::architecture(const GatHyper& hyper) {
  hyper.validate();
  const auto L = static_cast<std::size_t>(hyper.layers);
  const auto hidden = static_cast<std::size_t>(hyper.hidden_width);
  const auto heads = static_cast<std::size_t>(hyper.heads);
  std::vector<GatLayerShape> layers(L);
  std::size_t offset = 0;
  for (std::size_t l = 0; l < L; ++l) {
    auto& s = layers[l];
    s.in_dim = l == 0 ? static_cast<std::size_t>(hyper.input_width) : hidden * heads;
    bool last = l + 1 == L;
    s.out_dim = last ? static_cast<std::size_t>(hyper.output_width) : hidden;
    s.heads = last ? 1 : heads;
    s.weight_offset = offset;
    offset += s.heads * s.in_dim * s.out_dim;
    s.att_src_offset = offset;
    offset += s.heads * s.out_dim;
    s.att_dst_offset = offset;
    offset += s.heads * s.out_dim;
    s.bias_offset = offset;
    offset += s.heads * s.out_dim;
  }
  return layers;
}

GatModel GatModel::zeros(const GatHyper& hyper) {
  GatModel m;
  m.hyper_ = hyper;
  m.layers_ = architecture(hyper);
  std::size_t total = 0;
  for (const auto& s : m.layers_) total += s.parameter_count();
  m.params_.assign(total, 0.0);
  return m;
}

GatModel GatModel::initialize(const GatHyper& hyper, Rng& rng) {
  GatModel m = zeros(hyper);
  auto uniform = [&](double bound) { return (2.0 * rng.uniform01() - 1.0) * bound; };
  for (const auto& s : m.layers_) {
    double w_bound = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.width()));
    for (std::size_t i = 0; i < s.heads * s.in_dim * s.out_dim; ++i) m.params_[s.weight_offset + i] = uniform(w_bound);
    double a_bound = std::sqrt(6.0 / static_cast<double>(s.heads + s.out_dim));
    for (std::size_t i = 0; i < s.width(); ++i) {
      m.params_[s.att_src_offset + i] = uniform(a_bound);
      m.params_[s.att_dst_offset + i] = uniform(a_bound);
    }
  }
  return m;
}

GatModel GatModel::from_parameters(const GatHyper& hyper, std::vector<double> params) {
  GatModel m = zeros(hyper);
  if (params.size() != m.params_.size()) {
    throw InvalidArgument("parameter vector has " + std::to_string(params.size()) + " entries, architecture needs " +
                          std::to_string(m.params_.size()));
  }
  m.params_ = std::move(params);
  return m;
}

void GatModel::check_shape() const {
  auto expected = architecture(hyper_);
  if (expected != layers_) throw InvalidArgument("layer shapes disagree with hyperparameters");
  std::size_t total = 0;
  for (const auto& s : layers_) total += s.parameter_count();
  if (total != params_.size()) throw InvalidArgument("parameter count disagrees with layer shapes");
}

AttentionGraph::AttentionGraph(const Graph& g) {
  const std::size_t n = g.node_count();
  offsets_.assign(n + 1, 0);
  index_.reserve(g.adjacency().size() + n);
  for (NodeId i = 0; i < n; ++i) {
    auto nb = g.neighbors(i);
    auto split = std::lower_bound(nb.begin(), nb.end(), i);
    index_.insert(index_.end(), nb.begin(), split);
    index_.push_back(i);
    index_.insert(index_.end(), split, nb.end());
    offsets_[i + 1] = index_.size();
  }
}

Matrix node_features(std::size_t n, const TrainSplit& known, int input_width) {
  if (input_width == 1) {
    Matrix x(n, 1, 0.5);
    for (NodeId v : known.known_sybil) x(v, 0) = 1.0;
    for (NodeId v : known.known_honest) x(v, 0) = 0.0;
    return x;
  }
  if (input_width == 2) {
    Matrix x(n, 2, 0.5);
    for (NodeId v : known.known_sybil) {
      x(v, 0) = 0.0;
      x(v, 1) = 1.0;
    }
    for (NodeId v : known.known_honest) {
      x(v, 0) = 1.0;
      x(v, 1) = 0.0;
    }
    return x;
  }
  throw InvalidArgument("input width must be 1 or 2");
}

// ---------------------------------------------------------------------------
// Forward

Matrix gat_layer_forward(const GatModel& model, std::size_t layer, const AttentionGraph& graph, const Matrix& x_raw,
                         const ForwardOptions& options, LayerCache* cache) {
  const auto& s = model.layers().at(layer);
  const bool last = layer + 1 == model.layers().size();
  const std::size_t n = graph.node_count();
  if (x_raw.cols() != s.in_dim || x_raw.rows() != n) {
    throw InvalidArgument("layer " + std::to_string(layer) + " expects " + std::to_string(n) + "x" +
                          std::to_string(s.in_dim) + " input, got " + std::to_string(x_raw.rows()) + "x" +
                          std::to_string(x_raw.cols()));
  }
  const auto params = model.parameters();
  const double* W = params.data() + s.weight_offset;
  const double* a_src = params.data() + s.att_src_offset;
  const double* a_dst = params.data() + s.att_dst_offset;
  const double* bias = params.data() + s.bias_offset;
  const double slope = model.hyper().leaky_slope;
  const std::size_t H = s.heads, D = s.out_dim, I = s.in_dim, C = s.width();

  // Dropout on the layer input.
  Matrix dropped;
  Matrix scale;
  const Matrix* x = &x_raw;
  const double rate = model.hyper().dropout;
  if (options.training && rate > 0.0) {
    if (!options.rng) throw InvalidArgument("training forward pass needs a dropout stream");
    dropped = Matrix(n, I);
    scale = Matrix(n, I);
    const double keep = 1.0 / (1.0 - rate);
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < I; ++i) {
        double f = options.rng->uniform01() < rate ? 0.0 : keep;
        scale(v, i) = f;
        dropped(v, i) = x_raw(v, i) * f;
      }
    }
    x = &dropped;
  }

  Matrix z(n, C);
  std::vector<double> s_src(n * H, 0.0), s_dst(n * H, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const double* xv = x->row(v);
    double* zv = z.row(v);
    for (std::size_t h = 0; h < H; ++h) {
      const double* Wh = W + h * I * D;
      for (std::size_t i = 0; i < I; ++i) {
        const double xi = xv[i];
        if (xi == 0.0) continue;
        const double* Wi = Wh + i * D;
        for (std::size_t o = 0; o < D; ++o) zv[h * D + o] += xi * Wi[o];
      }
      double ss = 0.0, sd = 0.0;
      for (std::size_t o = 0; o < D; ++o) {
        ss += a_src[h * D + o] * zv[h * D + o];
        sd += a_dst[h * D + o] * zv[h * D + o];
      }
      s_src[v * H + h] = ss;
      s_dst[v * H + h] = sd;
    }
  }

  Matrix out(n, C);
  if (cache) {
    cache->logit.assign(graph.entry_count() * H, 0.0);
    cache->alpha.assign(graph.entry_count() * H, 0.0);
  }
  std::vector<double> weight;
  for (NodeId i = 0; i < n; ++i) {
    const std::size_t b = graph.begin(i), e = graph.end(i);
    weight.resize(e - b);
    double* oi = out.row(i);
    for (std::size_t h = 0; h < H; ++h) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t t = b; t < e; ++t) {
        double pre = s_dst[i * H + h] + s_src[graph.source(t) * H + h];
        if (cache) cache->logit[t * H + h] = pre;
        double act = pre > 0.0 ? pre : slope * pre;
        weight[t - b] = act;
        top = std::max(top, act);
      }
      double total = 0.0;
      for (double& w : weight) {
        w = std::exp(w - top);
        total += w;
      }
      for (std::size_t t = b; t < e; ++t) {
        const double alpha = weight[t - b] / total;
        if (cache) cache->alpha[t * H + h] = alpha;
        const double* zj = z.row(graph.source(t)) + h * D;
        for (std::size_t o = 0; o < D; ++o) oi[h * D + o] += alpha * zj[o];
      }
    }
    for (std::size_t c = 0; c < C; ++c) {
      oi[c] += bias[c];
      if (!last) oi[c] = std::tanh(oi[c]);
    }
  }

  if (cache) {
    cache->input = *x;
    cache->dropout_scale = std::move(scale);
    cache->z = std::move(z);
    cache->output = out;
  }
  return out;
}

Matrix gat_forward_logits(const GatModel& model, const AttentionGraph& graph, const Matrix& x,
                          const ForwardOptions& options, std::vector<LayerCache>* caches) {
  if (x.cols() != static_cast<std::size_t>(model.hyper().input_width)) {
    throw InvalidArgument("feature width " + std::to_string(x.cols()) + " does not match model input width " +
                          std::to_string(model.hyper().input_width));
  }
  const std::size_t L = model.layers().size();
  if (caches) caches->assign(L, LayerCache{});
  Matrix h = x;
  for (std::size_t l = 0; l < L; ++l) {
    h = gat_layer_forward(model, l, graph, h, options, caches ? &(*caches)[l] : nullptr);
  }
  return h;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

ScoreVector squash_logits(const Matrix& logits) {
  ScoreVector out{std::vector<double>(logits.rows()), "sybilgat"};
  for (std::size_t v = 0; v < logits.rows(); ++v) {
    if (logits.cols() == 1) {
      out.values[v] = sigmoid(logits(v, 0));
    } else {
      out.values[v] = sigmoid(logits(v, 1) - logits(v, 0));  // two-way softmax, sybil channel
    }
  }
  return out;
}

ScoreVector model_forward(const GatModel& model, const Graph& g, const Matrix& x, const ForwardOptions& options) {
  AttentionGraph graph(g);
  return squash_logits(gat_forward_logits(model, graph, x, options));
}

double classification_loss(const Matrix& logits, std::span<const NodeId> nodes, std::span<const Label> targets,
                           Matrix* dlogits) {
  if (nodes.size() != targets.size()) throw InvalidArgument("loss: nodes and targets differ in length");
  if (nodes.empty()) throw InvalidArgument("loss: empty node set");
  if (dlogits) *dlogits = Matrix(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(nodes.size());
  double total = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const NodeId v = nodes[k];
    const double y = targets[k] == Label::Sybil ? 1.0 : 0.0;
    if (logits.cols() == 1) {
      const double z = logits(v, 0);
      total += softplus(z) - y * z;
      if (dlogits) (*dlogits)(v, 0) += (sigmoid(z) - y) * inv;
    } else {
      const double z0 = logits(v, 0), z1 = logits(v, 1);
      const double top = std::max(z0, z1);
      const double lse = top + std::log(std::exp(z0 - top) + std::exp(z1 - top));
      total += lse - (y > 0.5 ? z1 : z0);
      if (dlogits) {
        const double p1 = std::exp(z1 - lse), p0 = std::exp(z0 - lse);
        (*dlogits)(v, 0) += (p0 - (1.0 - y)) * inv;
        (*dlogits)(v, 1) += (p1 - y) * inv;
      }
    }
  }
  return total * inv;
}

// ---------------------------------------------------------------------------
// Backward

namespace {

// Accumulates parameter gradients of one layer into grad; returns dL/d(raw input)
// when want_input_grad is set.
Matrix layer_backward(const GatModel& model, std::size_t layer, const AttentionGraph& graph, const LayerCache& cache,
                      const Matrix& d_out, std::vector<double>& grad, bool want_input_grad) {
  const auto& s = model.layers()[layer];
  const bool last = layer + 1 == model.layers().size();
  const std::size_t n = graph.node_count();
  const std::size_t H = s.heads, D = s.out_dim, I = s.in_dim, C = s.width();
  const auto params = model.parameters();
  const double* W = params.data() + s.weight_offset;
  const double* a_src = params.data() + s.att_src_offset;
  const double* a_dst = params.data() + s.att_dst_offset;
  double* gW = grad.data() + s.weight_offset;
  double* g_src = grad.data() + s.att_src_offset;
  double* g_dst = grad.data() + s.att_dst_offset;
  double* g_bias = grad.data() + s.bias_offset;
  const double slope = model.hyper().leaky_slope;

  // Through tanh.
  Matrix d_pre(n, C);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t c = 0; c < C; ++c) {
      double g = d_out(v, c);
      if (!last) {
        double y = cache.output(v, c);
        g *= 1.0 - y * y;
      }
      d_pre(v, c) = g;
      g_bias[c] += g;
    }
  }

  Matrix dz(n, C);
  std::vector<double> ds_src(n * H, 0.0), ds_dst(n * H, 0.0);
  std::vector<double> d_alpha;
  for (NodeId i = 0; i < n; ++i) {
    const std::size_t b = graph.begin(i), e = graph.end(i);
    d_alpha.resize(e - b);
    const double* gi = d_pre.row(i);
    for (std::size_t h = 0; h < H; ++h) {
      double weighted = 0.0;
      for (std::size_t t = b; t < e; ++t) {
        const NodeId j = graph.source(t);
        const double alpha = cache.alpha[t * H + h];
        const double* zj = cache.z.row(j) + h * D;
        double* dzj = dz.row(j) + h * D;
        double da = 0.0;
        for (std::size_t o = 0; o < D; ++o) {
          da += gi[h * D + o] * zj[o];
          dzj[o] += alpha * gi[h * D + o];
        }
        d_alpha[t - b] = da;
        weighted += alpha * da;
      }
      for (std::size_t t = b; t < e; ++t) {
        const double alpha = cache.alpha[t * H + h];
        const double d_act = alpha * (d_alpha[t - b] - weighted);
        const double d_logit = d_act * (cache.logit[t * H + h] > 0.0 ? 1.0 : slope);
        ds_dst[i * H + h] += d_logit;
        ds_src[graph.source(t) * H + h] += d_logit;
      }
    }
  }

  for (std::size_t v = 0; v < n; ++v) {
    const double* zv = cache.z.row(v);
    double* dzv = dz.row(v);
    for (std::size_t h = 0; h < H; ++h) {
      const double gs = ds_src[v * H + h], gd = ds_dst[v * H + h];
      for (std::size_t o = 0; o < D; ++o) {
        const std::size_t c = h * D + o;
        g_src[c] += gs * zv[c];
        g_dst[c] += gd * zv[c];
        dzv[c] += gs * a_src[c] + gd * a_dst[c];
      }
    }
  }

  Matrix dx;
  if (want_input_grad) dx = Matrix(n, I);
  for (std::size_t v = 0; v < n; ++v) {
    const double* xv = cache.input.row(v);
    const double* dzv = dz.row(v);
    for (std::size_t h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < I; ++i) {
        double* gWi = gW + (h * I + i) * D;
        const double* Wi = W + (h * I + i) * D;
        double acc = 0.0;
        for (std::size_t o = 0; o < D; ++o) {
          gWi[o] += xv[i] * dzv[h * D + o];
          acc += dzv[h * D + o] * Wi[o];
        }
        if (want_input_grad) dx(v, i) += acc;
      }
    }
  }
  if (want_input_grad && cache.dropout_scale.rows() == n) {
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t i = 0; i < I; ++i) dx(v, i) *= cache.dropout_scale(v, i);
    }
  }
  return dx;
}

}  // namespace

double loss_and_gradient(const GatModel& model, const AttentionGraph& graph, const Matrix& x,
                         std::span<const NodeId> nodes, std::span<const Label> targets, const ForwardOptions& options,
                         std::vector<double>& gradient) {
  std::vector<LayerCache> caches;
  Matrix logits = gat_forward_logits(model, graph, x, options, &caches);
  Matrix d;
  double loss = classification_loss(logits, nodes, targets, &d);
  gradient.assign(model.parameters().size(), 0.0);
  for (std::size_t l = model.layers().size(); l-- > 0;) {
    d = layer_backward(model, l, graph, caches[l], d, gradient, l > 0);
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Training

AdamOptimizer::AdamOptimizer(std::size_t size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(size, 0.0), v_(size, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> gradient) {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * gradient[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * gradient[i] * gradient[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

bool EarlyStopping::update(int epoch, double loss) {
  if (loss < best_loss_) {
    best_loss_ = loss;
    best_epoch_ = epoch;
    epochs_without_improvement_ = 0;
    return true;
  }
  ++epochs_without_improvement_;
  return false;
}

namespace {

std::pair<std::vector<NodeId>, std::vector<NodeId>> split_class(std::vector<NodeId> nodes, double fraction, Rng& rng) {
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    std::size_t j = i + rng.uniform_index(nodes.size() - i);
    std::swap(nodes[i], nodes[j]);
  }
  std::size_t first = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(nodes.size()) + 0.5));
  if (nodes.size() >= 2) first = std::clamp<std::size_t>(first, 1, nodes.size() - 1);
  else first = nodes.size();
  std::vector<NodeId> a(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(first));
  std::vector<NodeId> b(nodes.begin() + static_cast<std::ptrdiff_t>(first), nodes.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {std::move(a), std::move(b)};
}

void gather_targets(const TrainSplit& part, std::vector<NodeId>& nodes, std::vector<Label>& labels) {
  nodes.clear();
  labels.clear();
  for (NodeId v : part.known_honest) {
    nodes.push_back(v);
    labels.push_back(Label::Honest);
  }
  for (NodeId v : part.known_sybil) {
    nodes.push_back(v);
    labels.push_back(Label::Sybil);
  }
}

}  // namespace

std::pair<TrainSplit, TrainSplit> stratified_split(const TrainSplit& known, double first_fraction, Rng& rng) {
  auto [h1, h2] = split_class(known.known_honest, first_fraction, rng);
  auto [s1, s2] = split_class(known.known_sybil, first_fraction, rng);
  return {TrainSplit{std::move(h1), std::move(s1)}, TrainSplit{std::move(h2), std::move(s2)}};
}

TrainedModel train_gat(const Graph& g, const TrainSplit& split, const GatHyper& hyper) {
  hyper.validate();
  if (split.known_honest.size() < 2 || split.known_sybil.size() < 2) {
    throw InvalidArgument("training needs at least 2 known nodes per class (got " +
                          std::to_string(split.known_honest.size()) + " honest, " +
                          std::to_string(split.known_sybil.size()) + " sybil)");
  }
  const std::size_t n = g.node_count();
  for (const auto* set : {&split.known_honest, &split.known_sybil}) {
    for (NodeId v : *set) {
      if (v >= n) throw InvalidArgument("known node " + std::to_string(v) + " out of range");
    }
  }

  Rng split_rng = Rng::derive(hyper.seed, "gat-validation");
  auto [fit, validation] = stratified_split(split, hyper.train_val_split, split_rng);

  std::vector<NodeId> fit_nodes, val_nodes;
  std::vector<Label> fit_labels, val_labels;
  gather_targets(fit, fit_nodes, fit_labels);
  gather_targets(validation, val_nodes, val_labels);

  // Validation nodes stay encoded as unknown.
  const Matrix x = node_features(n, fit, hyper.input_width);
  const AttentionGraph graph(g);
  Rng init_rng = Rng::derive(hyper.seed, "gat-init");
  Rng dropout_rng = Rng::derive(hyper.seed, "gat-dropout");
  GatModel model = GatModel::initialize(hyper, init_rng);
  AdamOptimizer adam(model.parameters().size(), hyper.learning_rate, hyper.beta1, hyper.beta2, hyper.epsilon);
  EarlyStopping stopper(hyper.patience);

  TrainReport report;
  report.seed = hyper.seed;
  report.initial_train_loss =
      classification_loss(gat_forward_logits(model, graph, x, {}), fit_nodes, fit_labels);
  std::vector<double> best(model.parameters().begin(), model.parameters().end());
  std::vector<double> gradient;
  const ForwardOptions train_pass{true, &dropout_rng};

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    double loss = loss_and_gradient(model, graph, x, fit_nodes, fit_labels, train_pass, gradient);
    adam.step(model.parameters(), gradient);
    double val = classification_loss(gat_forward_logits(model, graph, x, {}), val_nodes, val_labels);
    report.train_loss.push_back(loss);
    report.validation_loss.push_back(val);
    report.epochs_run = epoch;
    if (stopper.update(epoch, val)) {
      std::copy(model.parameters().begin(), model.parameters().end(), best.begin());
    }
    if (stopper.should_stop()) {
      report.stopped_early = epoch < hyper.max_epochs;
      break;
    }
  }
  std::copy(best.begin(), best.end(), model.parameters().begin());
  report.best_epoch = stopper.best_epoch();

  ScoreVector scores = squash_logits(gat_forward_logits(model, graph, x, {}));
  std::vector<double> val_scores;
  for (NodeId v : val_nodes) val_scores.push_back(scores[v]);
  report.threshold = estimate_threshold(val_scores, val_labels);
  report.fit_nodes = std::move(fit_nodes);
  report.validation_nodes = std::move(val_nodes);
  return {std::move(model), std::move(report)};
}

double estimate_threshold(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("threshold: scores and labels differ in length");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Sybil));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    std::cerr << "warning: threshold estimation needs both classes; using 0.5\n";
    return 0.5;
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> cuts;
  cuts.push_back(sorted.front() / 2.0);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) cuts.push_back((sorted[i] + sorted[i + 1]) / 2.0);
  cuts.push_back((sorted.back() + 1.0) / 2.0);

  double best_j = -std::numeric_limits<double>::infinity();
  double best_cut = 0.5;
  for (double cut : cuts) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= cut) (labels[i] == Label::Sybil ? tp : fp) += 1;
    }
    double j = static_cast<double>(tp) / static_cast<double>(positives) -
               static_cast<double>(fp) / static_cast<double>(negatives);
    if (j > best_j + 1e-12) {
      best_j = j;
      best_cut = cut;
    } else if (j > best_j - 1e-12) {
      double d_new = std::abs(cut - 0.5), d_old = std::abs(best_cut - 0.5);
      if (d_new < d_old - 1e-12) best_cut = cut;
    }
  }
  return best_cut;
}

std::vector<Label> apply_threshold(const ScoreVector& scores, double threshold) {
  std::vector<Label> out(scores.size());
  for (std::size_t v = 0; v < scores.size(); ++v) out[v] = scores[v] >= threshold ? Label::Sybil : Label::Honest;
  return out;
}

ScoreVector predict_scores(const GatModel& model, const Graph& g, const TrainSplit& known) {
  AttentionGraph graph(g);
  Matrix x = node_features(g.node_count(), known, model.hyper().input_width);
  return squash_logits(gat_forward_logits(model, graph, x, {}));
}

Prediction predict(const GatModel& model, const Graph& g, const TrainSplit& known, std::uint64_t seed) {
  Prediction out;
  const double share = model.hyper().inference_split;
  if (share < 1.0 && known.known_honest.size() >= 2 && known.known_sybil.size() >= 2) {
    Rng rng = Rng::derive(seed, "gat-threshold");
    std::tie(out.input_known, out.threshold_known) = stratified_split(known, share, rng);
  } else {
    out.input_known = known;
  }
  out.scores = predict_scores(model, g, out.input_known);
  std::vector<double> s;
  std::vector<Label> l;
  for (NodeId v : out.threshold_known.known_honest) {
    s.push_back(out.scores[v]);
    l.push_back(Label::Honest);
  }
  for (NodeId v : out.threshold_known.known_sybil) {
    s.push_back(out.scores[v]);
    l.push_back(Label::Sybil);
  }
  out.threshold = s.empty() ? 0.5 : estimate_threshold(s, l);
  out.labels = apply_threshold(out.scores, out.threshold);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr const char* kCheckpointFormat = "sybillab-gat-checkpoint";
constexpr int kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const GatModel& model, double threshold, const std::filesystem::path& path) {
  model.check_shape();
  json layers = json::array();
  const auto p = model.parameters();
  auto slice = [&](std::size_t offset, std::size_t count) {
    return std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(offset),
                               p.begin() + static_cast<std::ptrdiff_t>(offset + count));
  };
  for (const auto& s : model.layers()) {
    layers.push_back({{"in_dim", s.in_dim},
                      {"out_dim", s.out_dim},
                      {"heads", s.heads},
                      {"weight", slice(s.weight_offset, s.heads * s.in_dim * s.out_dim)},
                      {"att_src", slice(s.att_src_offset, s.width())},
                      {"att_dst", slice(s.att_dst_offset, s.width())},
                      {"bias", slice(s.bias_offset, s.width())}});
  }
  json doc{{"format", kCheckpointFormat},
           {"version", kCheckpointVersion},
           {"hyper", hyper_to_json(model.hyper())},
           {"threshold", threshold},
           {"layers", layers}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  json doc;
  try {
    doc = json::parse(in);
    if (doc.at("format").get<std::string>() != kCheckpointFormat) throw IoError("not a checkpoint file");
    int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw IoError("unsupported checkpoint version " + std::to_string(version));
    }
    GatHyper h = hyper_from_json(doc.at("hyper"));
    auto shapes = GatModel::architecture(h);
    const auto& layers = doc.at("layers");
    if (layers.size() != shapes.size()) throw IoError("checkpoint layer count disagrees with hyperparameters");
    std::vector<double> params;
    for (std::size_t l = 0; l < shapes.size(); ++l) {
      const auto& jl = layers[l];
      const auto& s = shapes[l];
      if (jl.at("in_dim").get<std::size_t>() != s.in_dim || jl.at("out_dim").get<std::size_t>() != s.out_dim ||
          jl.at("heads").get<std::size_t>() != s.heads) {
        throw IoError("checkpoint layer " + std::to_string(l) + " shape disagrees with hyperparameters");
      }
      for (const char* key : {"weight", "att_src", "att_dst", "bias"}) {
        auto values = jl.at(key).get<std::vector<double>>();
        params.insert(params.end(), values.begin(), values.end());
      }
    }
    Checkpoint cp{GatModel::from_parameters(h, std::move(params)), doc.at("threshold").get<double>()};
    return cp;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed checkpoint: " + e.what());
  } catch (const InvalidArgument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace sybillab
