#pragma once

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mfplab/csv.hpp"
#include "mfplab/error.hpp"
#include "mfplab/graph.hpp"
#include "mfplab/propagation.hpp"
#include "mfplab/seed.hpp"

namespace mfplab {

// Two-layer GCN: logits = A~ ReLU(A~ X W1 + b1) W2 + b2, with A~ the
// self-loop-augmented symmetric normalization.

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
struct GcnParams {
  DenseMatrix<T> w1;  // in_dim x hidden
  RowVector<T> b1;    // hidden
  DenseMatrix<T> w2;  // hidden x num_classes
  RowVector<T> b2;    // num_classes

  Index in_dim() const noexcept { return w1.rows(); }
  Index hidden_dim() const noexcept { return w1.cols(); }
  Index num_classes() const noexcept { return w2.cols(); }

  static GcnParams zeros(Index in_dim, Index hidden, Index classes) {
    return {DenseMatrix<T>::Zero(in_dim, hidden), RowVector<T>::Zero(hidden), DenseMatrix<T>::Zero(hidden, classes),
            RowVector<T>::Zero(classes)};
  }

  /// Glorot-uniform weights, zero biases.
  static GcnParams glorot(Index in_dim, Index hidden, Index classes, SeedStream seed) {
    GcnParams p = zeros(in_dim, hidden, classes);
    auto fill = [](DenseMatrix<T>& w, SeedStream s) {
      const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      auto rng = s.engine();
      std::uniform_real_distribution<double> u(-a, a);
      for (Index i = 0; i < w.rows(); ++i)
        for (Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<T>(u(rng));
    };
    fill(p.w1, seed.derive("w1"));
    fill(p.w2, seed.derive("w2"));
    return p;
  }

  bool all_finite() const { return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite(); }
};

template <typename T>
struct GcnCache {
  const DenseMatrix<T>* x = nullptr;  // input, not owned
  DenseMatrix<T> z1;                  // pre-activation of layer 1
  DenseMatrix<T> hidden;              // ReLU(z1) after dropout
  DenseMatrix<T> dropout_scale;       // per-entry mask / keep_prob, empty when dropout is off
  DenseMatrix<T> agg_hidden;          // A~ * hidden
};

/// Dropout on the hidden activation. Disabled when rate is 0 or `training` is false.
struct DropoutState {
  double rate = 0.0;
  bool training = false;
  SeedStream seed{};
};

template <typename T>
DenseMatrix<T> gcn_forward(const GcnParams<T>& params, const DenseMatrix<T>& x, const CsrMatrix<T>& a_gcn,
                           const DropoutState& dropout, GcnCache<T>* cache = nullptr) {
  if (x.cols() != params.in_dim())
    throw ShapeError("gcn: input has " + std::to_string(x.cols()) + " columns, model expects " +
                     std::to_string(params.in_dim()));
  if (x.rows() != a_gcn.rows) throw ShapeError("gcn: feature rows do not match graph size");

  DenseMatrix<T> xw = x * params.w1;
  DenseMatrix<T> z1 = spmm(a_gcn, xw);
  z1.rowwise() += params.b1;
  DenseMatrix<T> h = z1.cwiseMax(T(0));
  DenseMatrix<T> scale;
  if (dropout.training && dropout.rate > 0.0) {
    const double keep = 1.0 - dropout.rate;
    scale.resize(h.rows(), h.cols());
    auto rng = dropout.seed.engine();
    std::bernoulli_distribution bern(keep);
    for (Index i = 0; i < scale.rows(); ++i)
      for (Index j = 0; j < scale.cols(); ++j) scale(i, j) = bern(rng) ? static_cast<T>(1.0 / keep) : T(0);
    h.array() *= scale.array();
  }
  DenseMatrix<T> ah = spmm(a_gcn, h);
  DenseMatrix<T> logits = ah * params.w2;
  logits.rowwise() += params.b2;
  if (cache) {
    cache->x = &x;
    cache->z1 = std::move(z1);
    cache->hidden = std::move(h);
    cache->dropout_scale = std::move(scale);
    cache->agg_hidden = std::move(ah);
  }
  return logits;
}

/// Gradients of a loss w.r.t. all parameters given dLoss/dlogits. The L2 term
/// weight_decay/2 * (|W1|^2 + |W2|^2) contributes weight_decay * W.
template <typename T>
GcnParams<T> gcn_backward(const GcnParams<T>& params, const GcnCache<T>& cache, const CsrMatrix<T>& a_gcn,
                          const DenseMatrix<T>& grad_logits, double weight_decay = 0.0) {
  GcnParams<T> g;
  g.w2 = cache.agg_hidden.transpose() * grad_logits;
  g.b2 = grad_logits.colwise().sum();
  DenseMatrix<T> d_ah = grad_logits * params.w2.transpose();
  DenseMatrix<T> d_h = spmm(a_gcn, d_ah);  // A~ is symmetric
  if (cache.dropout_scale.size() > 0) d_h.array() *= cache.dropout_scale.array();
  d_h.array() *= (cache.z1.array() > T(0)).template cast<T>();
  g.b1 = d_h.colwise().sum();
  DenseMatrix<T> d_xw = spmm(a_gcn, d_h);
  g.w1 = cache.x->transpose() * d_xw;
  if (weight_decay != 0.0) {
    g.w1 += static_cast<T>(weight_decay) * params.w1;
    g.w2 += static_cast<T>(weight_decay) * params.w2;
  }
  return g;
}

/// Mean softmax cross-entropy over `nodes`; writes dLoss/dlogits into `grad`
/// when non-null. Uses max-subtraction so large logits stay finite.
template <typename T>
double softmax_cross_entropy(const DenseMatrix<T>& logits, const LabelVector& y, std::span<const Index> nodes,
                             DenseMatrix<T>* grad = nullptr) {
  if (nodes.empty()) throw InvalidArgument("cross-entropy over an empty node set");
  if (grad) *grad = DenseMatrix<T>::Zero(logits.rows(), logits.cols());
  const double inv_n = 1.0 / static_cast<double>(nodes.size());
  double loss = 0.0;
  std::vector<double> p(static_cast<std::size_t>(logits.cols()));
  for (Index i : nodes) {
    double mx = static_cast<double>(logits.row(i).maxCoeff());
    double sum = 0.0;
    for (Index c = 0; c < logits.cols(); ++c) sum += (p[c] = std::exp(static_cast<double>(logits(i, c)) - mx));
    const double log_sum = std::log(sum);
    loss -= (static_cast<double>(logits(i, y[i])) - mx - log_sum) * inv_n;
    if (grad)
      for (Index c = 0; c < logits.cols(); ++c)
        (*grad)(i, c) = static_cast<T>((p[c] / sum - (c == y[i] ? 1.0 : 0.0)) * inv_n);
  }
  return loss;
}

template <typename T>
double l2_penalty(const GcnParams<T>& p, double weight_decay) {
  return 0.5 * weight_decay *
         (static_cast<double>(p.w1.squaredNorm()) + static_cast<double>(p.w2.squaredNorm()));
}

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.01;
  Index hidden_dim = 64;
  double dropout_rate = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double weight_decay = 5e-4;
  SeedStream seed{};

  void validate() const {
    if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
    if (hidden_dim < 1) throw InvalidArgument("hidden dim must be >= 1");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("dropout rate must lie in [0,1)");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
      throw InvalidArgument("Adam betas must lie in [0,1)");
    if (!(adam_epsilon > 0.0)) throw InvalidArgument("Adam epsilon must be positive");
    if (!(weight_decay >= 0.0)) throw InvalidArgument("weight decay must be >= 0");
  }
};

template <typename T>
class Adam {
 public:
  Adam(const GcnParams<T>& like, const TrainConfig& cfg)
      : cfg_(cfg),
        m_(GcnParams<T>::zeros(like.in_dim(), like.hidden_dim(), like.num_classes())),
        v_(m_) {}

  void step(GcnParams<T>& p, const GcnParams<T>& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.adam_beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.adam_beta2, t_);
    update(p.w1, g.w1, m_.w1, v_.w1, c1, c2);
    update(p.b1, g.b1, m_.b1, v_.b1, c1, c2);
    update(p.w2, g.w2, m_.w2, v_.w2, c1, c2);
    update(p.b2, g.b2, m_.b2, v_.b2, c1, c2);
  }

 private:
  template <typename M>
  void update(M& param, const M& grad, M& m, M& v, double c1, double c2) const {
    const T b1 = static_cast<T>(cfg_.adam_beta1), b2 = static_cast<T>(cfg_.adam_beta2);
    m = b1 * m + (T(1) - b1) * grad;
    v.array() = b2 * v.array() + (T(1) - b2) * grad.array().square();
    const T lr = static_cast<T>(cfg_.learning_rate);
    param.array() -= lr * (m.array() / static_cast<T>(c1)) /
                     ((v.array() / static_cast<T>(c2)).sqrt() + static_cast<T>(cfg_.adam_epsilon));
  }

  TrainConfig cfg_;
  GcnParams<T> m_, v_;
  int t_ = 0;
};

struct TrainHistory {
  std::vector<double> train_loss;  // per epoch, loss before that epoch's update
  std::vector<double> val_accuracy;  // per epoch after the update; empty without validation nodes
};

template <typename T>
struct TrainResult {
  GcnParams<T> params;
  TrainHistory history;
};

template <typename T>
std::vector<int> gcn_predict_labels(const GcnParams<T>& params, const DenseMatrix<T>& x, const CsrMatrix<T>& a_gcn) {
  return row_argmax(gcn_forward(params, x, a_gcn, DropoutState{}));
}

/// Full-batch training for exactly cfg.epochs epochs; returns the final-epoch parameters.
template <typename T>
TrainResult<T> train(const Graph& g, const DenseMatrix<T>& x, const LabelVector& y, std::span<const Index> train_nodes,
                     std::span<const Index> val_nodes, const TrainConfig& cfg) {
  cfg.validate();
  if (train_nodes.empty()) throw InvalidArgument("train: empty training set");
  if (x.rows() != g.num_nodes() || y.size() != g.num_nodes())
    throw ShapeError("train: graph, features and labels disagree on node count");
  const auto a_gcn = gcn_normalize_adjacency<T>(g);
  TrainResult<T> r{GcnParams<T>::glorot(x.cols(), cfg.hidden_dim, y.num_classes, cfg.seed.derive("init")), {}};
  Adam<T> opt(r.params, cfg);
  GcnCache<T> cache;
  DenseMatrix<T> grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const DropoutState drop{cfg.dropout_rate, true, cfg.seed.derive("dropout", static_cast<std::uint64_t>(epoch))};
    const DenseMatrix<T> logits = gcn_forward(r.params, x, a_gcn, drop, &cache);
    const double loss = softmax_cross_entropy(logits, y, train_nodes, &grad) + l2_penalty(r.params, cfg.weight_decay);
    if (!std::isfinite(loss))
      throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch + 1));
    r.history.train_loss.push_back(loss);
    opt.step(r.params, gcn_backward(r.params, cache, a_gcn, grad, cfg.weight_decay));
    if (!val_nodes.empty()) {
      const auto pred = gcn_predict_labels(r.params, x, a_gcn);
      Index correct = 0;
      for (Index i : val_nodes) correct += (pred[i] == y[i]) ? 1 : 0;
      r.history.val_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(val_nodes.size()));
    }
  }
  return r;
}

/// Argmax class per node with dropout disabled. Throws ShapeError when the
/// column count differs from the model's input width.
template <typename T>
LabelVector predict(const GcnParams<T>& params, const Graph& g, const DenseMatrix<T>& x) {
  LabelVector out;
  out.num_classes = static_cast<int>(params.num_classes());
  out.labels = gcn_predict_labels(params, x, gcn_normalize_adjacency<T>(g));
  return out;
}

// Checkpoints: JSON with "format": "MFPLAB-CKPT-1" and one
// {"shape": [rows, cols], "data": [...row-major...]} entry per tensor.

inline constexpr const char* kCheckpointMagic = "MFPLAB-CKPT-1";

template <typename T>
void save_checkpoint(const GcnParams<T>& p, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointMagic;
  auto put = [&](const char* name, const auto& m) {
    std::vector<double> data(static_cast<std::size_t>(m.size()));
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) data[static_cast<std::size_t>(r * m.cols() + c)] = static_cast<double>(m(r, c));
    j["tensors"][name] = {{"shape", {m.rows(), m.cols()}}, {"data", data}};
  };
  put("w1", p.w1);
  put("b1", p.b1);
  put("w2", p.w2);
  put("b2", p.b2);
  csv::write_file(path, j.dump());
}

template <typename T>
GcnParams<T> load_checkpoint(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("checkpoint: " + std::string(e.what()));
  }
  if (j.value("format", "") != kCheckpointMagic) throw LoadError("checkpoint: missing or unknown format tag");
  GcnParams<T> p;
  auto get = [&](const char* name, auto& m) {
    const auto& t = j.at("tensors").at(name);
    const Index rows = t.at("shape").at(0).get<Index>(), cols = t.at("shape").at(1).get<Index>();
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<Index>(data.size()) != rows * cols) throw LoadError(std::string("checkpoint: bad size for ") + name);
    m.resize(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = static_cast<T>(data[static_cast<std::size_t>(r * cols + c)]);
  };
  try {
    get("w1", p.w1);
    get("b1", p.b1);
    get("w2", p.w2);
    get("b2", p.b2);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("checkpoint: " + std::string(e.what()));
  }
  if (p.w1.cols() != p.b1.cols() || p.w1.cols() != p.w2.rows() || p.w2.cols() != p.b2.cols())
    throw LoadError("checkpoint: inconsistent tensor shapes");
  return p;
}

}  // namespace mfplab
