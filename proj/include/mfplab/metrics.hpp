#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mfplab/error.hpp"
#include "mfplab/gcn.hpp"
#include "mfplab/graph.hpp"
#include "mfplab/propagation.hpp"
#include "mfplab/sparsity.hpp"

namespace mfplab {

inline double accuracy(const LabelVector& y, const LabelVector& yhat, std::span<const Index> nodes) {
  if (nodes.empty()) throw InvalidArgument("accuracy: empty node set");
  Index correct = 0;
  for (Index i : nodes) correct += (y[i] == yhat[i]) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

/// Unweighted mean of per-class F1 over the classes that occur in y on `nodes`.
inline double macro_f1(const LabelVector& y, const LabelVector& yhat, std::span<const Index> nodes) {
  if (nodes.empty()) throw InvalidArgument("macro_f1: empty node set");
  const int classes = std::max({y.num_classes, yhat.num_classes, 1});
  std::vector<Index> tp(classes, 0), fp(classes, 0), fn(classes, 0);
  std::vector<bool> present(classes, false);
  for (Index i : nodes) {
    const int t = y[i], p = yhat[i];
    present[t] = true;
    if (t == p) {
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  double sum = 0.0;
  int count = 0;
  for (int c = 0; c < classes; ++c) {
    if (!present[c]) continue;
    ++count;
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    sum += denom > 0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
  }
  return sum / count;
}

/// One row per original column.
struct ExposureRow {
  Index column = 0;
  double min_rmse = 0.0;
  double max_abs_pcc = 0.0;
  Index retained = 0;  // retained entries of this column in the sparsified input
};

struct ExposureReport {
  std::string method;
  std::string dataset;
  std::vector<ExposureRow> rows;
};

namespace detail {

inline void check_variants(const FeatureMatrix& original, const FeatureMatrix& multi, const char* who) {
  if (original.rows() != multi.rows() || original.cols() == 0 || multi.cols() % original.cols() != 0)
    throw ShapeError(std::string(who) + ": representation is " + std::to_string(multi.rows()) + "x" +
                     std::to_string(multi.cols()) + ", not a multiple of the original " +
                     std::to_string(original.rows()) + "x" + std::to_string(original.cols()));
}

// Plain sequential loops: results are reproducible term-for-term by a naive reference.
inline double rmse(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  double ss = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    ss += diff * diff;
  }
  return std::sqrt(ss / static_cast<double>(a.size()));
}

/// Pearson correlation; 0 when either side has zero variance.
inline double pcc(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  const Index n = a.size();
  double sa = 0.0, sb = 0.0;
  for (Index i = 0; i < n; ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / static_cast<double>(n), mb = sb / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

template <typename Fn>
std::vector<double> reduce_over_variants(const FeatureMatrix& original, const FeatureMatrix& multi, Fn&& fn,
                                         const char* who) {
  check_variants(original, multi, who);
  const Index d = original.cols(), eta = multi.cols() / d;
  std::vector<double> out(static_cast<std::size_t>(d));
  // Column-major copies make the per-column loops contiguous.
  const Eigen::MatrixXd orig = original;
  const Eigen::MatrixXd mv = multi;
  for (Index c = 0; c < d; ++c) {
    double acc = fn(orig.col(c), mv.col(c));
    for (Index t = 1; t < eta; ++t) acc = fn.combine(acc, fn(orig.col(c), mv.col(c + t * d)));
    out[static_cast<std::size_t>(c)] = acc;
  }
  return out;
}

struct MinRmse {
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const {
    return rmse(a, b);
  }
  double combine(double x, double y) const { return std::min(x, y); }
};

struct MaxAbsPcc {
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) const {
    return std::abs(pcc(a, b));
  }
  double combine(double x, double y) const { return std::max(x, y); }
};

}  // namespace detail

/// Per original column c: min RMSE against its variants c, c+d, ..., c+(eta-1)d.
inline std::vector<double> exposure_rmse(const FeatureMatrix& original, const FeatureMatrix& multi) {
  return detail::reduce_over_variants(original, multi, detail::MinRmse{}, "exposure_rmse");
}

/// Per original column: max |Pearson correlation| over its variants.
inline std::vector<double> exposure_pcc(const FeatureMatrix& original, const FeatureMatrix& multi) {
  return detail::reduce_over_variants(original, multi, detail::MaxAbsPcc{}, "exposure_pcc");
}

inline ExposureReport measure_exposure(const FeatureMatrix& original, const FeatureMatrix& multi, std::string method,
                                       std::string dataset, const std::vector<Index>& retained_per_column = {}) {
  const auto r = exposure_rmse(original, multi);
  const auto p = exposure_pcc(original, multi);
  ExposureReport rep{std::move(method), std::move(dataset), {}};
  rep.rows.reserve(r.size());
  for (std::size_t c = 0; c < r.size(); ++c)
    rep.rows.push_back({static_cast<Index>(c), r[c], p[c],
                        retained_per_column.empty() ? Index{0} : retained_per_column[c]});
  return rep;
}

/// Exposure of an N(0,1) matrix shaped like `original`: the zero-leakage reference.
inline ExposureReport random_baseline_exposure(const FeatureMatrix& original, SeedStream seed,
                                               std::string dataset = "") {
  FeatureMatrix noise(original.rows(), original.cols());
  fill_gaussian(noise, NoiseSpec{0.0, 1.0}, seed);
  return measure_exposure(original, noise, "random", std::move(dataset));
}

struct Split {
  std::vector<Index> train, val, test;
};

/// F1 of a model trained on one representation and evaluated on another,
/// indexed [train_rep][test_rep] with 0 = original X, 1 = propagated X-hat.
struct CrossRepReport {
  double f1[2][2] = {{0, 0}, {0, 0}};
  std::uint64_t seed_x = 0;
  std::uint64_t seed_xhat = 0;
};

template <typename T = float>
CrossRepReport cross_representation(const Graph& g, const FeatureMatrix& x, const FeatureMatrix& x_hat,
                                    const LabelVector& y, const Split& split, const TrainConfig& cfg) {
  if (x.cols() != x_hat.cols() || x.rows() != x_hat.rows())
    throw ShapeError("cross_representation: X has " + std::to_string(x.cols()) + " columns, X-hat has " +
                     std::to_string(x_hat.cols()));
  const DenseMatrix<T> reps[2] = {x.cast<T>(), x_hat.cast<T>()};
  CrossRepReport out;
  for (int a = 0; a < 2; ++a) {
    TrainConfig c = cfg;
    c.seed = cfg.seed.derive(a == 0 ? "phi-x" : "phi-xhat");
    (a == 0 ? out.seed_x : out.seed_xhat) = c.seed.seed();
    const auto model = train<T>(g, reps[a], y, split.train, split.val, c);
    for (int b = 0; b < 2; ++b) out.f1[a][b] = macro_f1(y, predict(model.params, g, reps[b]), split.test);
  }
  return out;
}

}  // namespace mfplab
