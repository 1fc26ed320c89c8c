#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfplab/error.hpp"
#include "mfplab/graph.hpp"
#include "mfplab/seed.hpp"
#include "mfplab/sparsity.hpp"

namespace mfplab {

struct PropagationConfig {
  int gamma = 40;   // propagation iterations per view
  int eta = 10;     // number of views
  double p = 0.8;   // per-entry view sampling ratio
  NoiseSpec noise{};
  SeedStream seed{};

  void validate() const {
    if (gamma < 1) throw InvalidArgument("gamma must be >= 1");
    if (eta < 1) throw InvalidArgument("eta must be >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
    noise.validate();
  }
};

/// Column-wise concatenation of equally wide views.
struct MultiViewRepresentation {
  FeatureMatrix matrix;
  Index view_width = 0;

  Index num_views() const noexcept { return view_width == 0 ? 0 : matrix.cols() / view_width; }

  std::vector<Index> view_boundaries() const {
    std::vector<Index> b;
    for (Index t = 0; t <= num_views(); ++t) b.push_back(t * view_width);
    return b;
  }

  auto view(Index t) { return matrix.middleCols(t * view_width, view_width); }
  auto view(Index t) const { return matrix.middleCols(t * view_width, view_width); }
};

/// Diffuses `x0` over `a_hat` for `gamma` steps, restoring the `known` entries
/// to their `x0` values after every step. gamma == 0 returns x0.
inline FeatureMatrix feature_propagate(const FeatureMatrix& x0, const FeatureMask& known, const NormalizedAdjacency& a_hat,
                                       int gamma) {
  known.check_shape(x0, "feature_propagate");
  if (a_hat.rows != x0.rows()) throw ShapeError("feature_propagate: adjacency does not match feature rows");
  if (gamma < 0) throw InvalidArgument("gamma must be non-negative");
  FeatureMatrix h = x0;
  FeatureMatrix next(x0.rows(), x0.cols());
  const double* src = x0.data();
  for (int it = 0; it < gamma; ++it) {
    spmm(a_hat, h, next);
    double* dst = next.data();
    for (auto o : known.offsets()) dst[o] = src[o];
    h.swap(next);
  }
  return h;
}

namespace detail {

inline void check_finite(const FeatureMatrix& m, const char* who) {
  if (!m.allFinite()) throw NumericalError(std::string(who) + ": non-finite value in propagated output");
}

}  // namespace detail

/// Builds one propagated view: entries of k_t keep the values of `x_tilde`,
/// every other entry is fresh per-view noise, then FP with reset on k_t.
/// Depends only on (cfg.seed, t), so views can be computed in any order.
inline FeatureMatrix mfp_view(const FeatureMatrix& x_tilde, const FeatureMask& k, const NormalizedAdjacency& a_hat,
                              const PropagationConfig& cfg, std::uint64_t t) {
  const FeatureMask k_t = sample_view_subset(k, cfg.p, cfg.seed, t);
  FeatureMatrix x_t(x_tilde.rows(), x_tilde.cols());
  fill_gaussian(x_t, cfg.noise, cfg.seed.derive("view-noise", t));
  const double* src = x_tilde.data();
  double* dst = x_t.data();
  for (auto o : k_t.offsets()) dst[o] = src[o];
  return feature_propagate(x_t, k_t, a_hat, cfg.gamma);
}

/// Multi-view feature propagation: stochastic sparse sampling of `x` on `k`,
/// then eta independent views propagated and concatenated column-wise.
inline MultiViewRepresentation mfp(const FeatureMatrix& x, const FeatureMask& k, const NormalizedAdjacency& a_hat,
                                   const PropagationConfig& cfg) {
  cfg.validate();
  k.check_shape(x, "mfp");
  const FeatureMatrix x_tilde = stochastic_sparse_sample(x, k, cfg.noise, cfg.seed.derive("sparse-sample"));
  MultiViewRepresentation out;
  out.view_width = x.cols();
  out.matrix.resize(x.rows(), x.cols() * cfg.eta);
  for (int t = 0; t < cfg.eta; ++t) out.view(t) = mfp_view(x_tilde, k, a_hat, cfg, static_cast<std::uint64_t>(t));
  detail::check_finite(out.matrix, "mfp");
  return out;
}

inline MultiViewRepresentation mfp(const FeatureMatrix& x, const FeatureMask& k, const Graph& g,
                                   const PropagationConfig& cfg) {
  return mfp(x, k, normalize_adjacency(g), cfg);
}

/// Naive FP: unknown entries start at zero.
inline FeatureMatrix fp(const FeatureMatrix& x, const FeatureMask& k, const NormalizedAdjacency& a_hat, int gamma) {
  k.check_shape(x, "fp");
  FeatureMatrix x0 = FeatureMatrix::Zero(x.rows(), x.cols());
  const double* src = x.data();
  double* dst = x0.data();
  for (auto o : k.offsets()) dst[o] = src[o];
  return feature_propagate(x0, k, a_hat, gamma);
}

/// Random feature propagation: eta trajectories of N(0,1) features of width
/// `dim`, each diffused gamma steps with no reset.
inline MultiViewRepresentation rfp(const NormalizedAdjacency& a_hat, Index dim, int eta, int gamma, SeedStream seed) {
  if (dim < 1) throw InvalidArgument("rfp: dim must be >= 1");
  if (eta < 1) throw InvalidArgument("rfp: eta must be >= 1");
  const FeatureMask none(a_hat.rows, dim, {});
  MultiViewRepresentation out;
  out.view_width = dim;
  out.matrix.resize(a_hat.rows, dim * eta);
  for (int t = 0; t < eta; ++t) {
    FeatureMatrix init(a_hat.rows, dim);
    fill_gaussian(init, NoiseSpec{0.0, 1.0}, seed.derive("rfp-trajectory", static_cast<std::uint64_t>(t)));
    out.view(t) = feature_propagate(init, none, a_hat, gamma);
  }
  detail::check_finite(out.matrix, "rfp");
  return out;
}

inline MultiViewRepresentation rfp(const Graph& g, Index dim, int eta, int gamma, SeedStream seed) {
  return rfp(normalize_adjacency(g), dim, eta, gamma, seed);
}

/// Per-row argmax; ties resolve to the lowest column index.
template <typename Derived>
std::vector<int> row_argmax(const Eigen::MatrixBase<Derived>& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()), 0);
  for (Index i = 0; i < scores.rows(); ++i) {
    int best = 0;
    for (Index c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = static_cast<int>(c);
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

struct LabelPropagationResult {
  FeatureMatrix scores;  // |V| x num_classes
  LabelVector predictions;
};

/// Diffuses one-hot training labels over the normalized adjacency, resetting
/// training rows after every step.
inline LabelPropagationResult label_propagate(const Graph& g, const LabelVector& y, std::span<const Index> train_nodes,
                                              int gamma) {
  if (train_nodes.empty()) throw InvalidArgument("label_propagate: empty training set");
  if (y.size() != g.num_nodes()) throw ShapeError("label_propagate: label count does not match node count");
  const Index n = g.num_nodes();
  FeatureMatrix z0 = FeatureMatrix::Zero(n, y.num_classes);
  std::vector<std::pair<Index, Index>> known;
  known.reserve(train_nodes.size() * static_cast<std::size_t>(y.num_classes));
  for (Index i : train_nodes) {
    if (i < 0 || i >= n) throw InvalidArgument("label_propagate: training node out of range");
    z0(i, y[i]) = 1.0;
    for (Index c = 0; c < y.num_classes; ++c) known.emplace_back(i, c);
  }
  const FeatureMask mask = FeatureMask::from_coordinates(n, y.num_classes, known);
  LabelPropagationResult r;
  r.scores = feature_propagate(z0, mask, normalize_adjacency(g), gamma);
  r.predictions.num_classes = y.num_classes;
  r.predictions.labels = row_argmax(r.scores);
  return r;
}

}  // namespace mfplab
