#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "mfplab/error.hpp"
#include "mfplab/graph.hpp"

namespace mfplab {

struct Eigenpairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // one unit-norm column per value
};

struct EigenSolverOptions {
  Index dense_limit = 1500;    // graphs up to this size use a dense solver
  double tolerance = 1e-8;     // max residual |L v - lambda v| per pair
  Index max_krylov = 2000;
  std::uint64_t seed = 0x5eed;
};

namespace detail {

/// Connected components of nodes that have at least one edge; returns one
/// unit-norm null vector D^{1/2} 1_C of L = I - A_hat per component.
inline std::vector<Eigen::VectorXd> laplacian_null_basis(const Graph& g) {
  const Index n = g.num_nodes();
  std::vector<Index> comp(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::VectorXd> basis;
  std::vector<Index> stack;
  for (Index s = 0; s < n; ++s) {
    if (comp[s] >= 0 || g.degree(s) == 0) continue;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    comp[s] = static_cast<Index>(basis.size());
    stack.assign(1, s);
    while (!stack.empty()) {
      Index u = stack.back();
      stack.pop_back();
      v[u] = std::sqrt(static_cast<double>(g.degree(u)));
      for (Index w : g.neighbors(u))
        if (comp[w] < 0) {
          comp[w] = comp[s];
          stack.push_back(w);
        }
    }
    v.normalize();
    basis.push_back(std::move(v));
  }
  return basis;
}

inline void apply_laplacian(const NormalizedAdjacency& a, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  out = v;
  for (Index i = 0; i < a.rows; ++i) {
    double s = 0.0;
    for (Index p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) s += a.values[p] * v[a.col_idx[p]];
    out[i] -= s;
  }
}

inline double max_residual(const NormalizedAdjacency& a, const Eigenpairs& e) {
  double worst = 0.0;
  Eigen::VectorXd lv;
  for (Index j = 0; j < e.values.size(); ++j) {
    apply_laplacian(a, e.vectors.col(j), lv);
    worst = std::max(worst, (lv - e.values[j] * e.vectors.col(j)).norm());
  }
  return worst;
}

inline Eigenpairs dense_laplacian_eigenpairs(const NormalizedAdjacency& a, Index count) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Identity(a.rows, a.rows) - Eigen::MatrixXd(a.to_dense());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed to converge");
  return {solver.eigenvalues().head(count), solver.eigenvectors().leftCols(count)};
}

/// Smallest `count` eigenpairs of L orthogonal to `deflate`, by Lanczos with
/// full reorthogonalization on I + A_hat (whose top spectrum is L's bottom).
inline Eigenpairs lanczos_laplacian_eigenpairs(const NormalizedAdjacency& a, Index count,
                                               const std::vector<Eigen::VectorXd>& deflate,
                                               const EigenSolverOptions& opt) {
  const Index n = a.rows;
  const Index free_dim = n - static_cast<Index>(deflate.size());
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  auto project = [&](Eigen::VectorXd& v) {
    for (const auto& z : deflate) v -= z.dot(v) * z;
  };

  Index m = std::min<Index>(free_dim, std::max<Index>(4 * count + 20, 100));
  double last_residual = 0.0;
  while (true) {
    Eigen::MatrixXd q(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    Eigen::VectorXd v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    project(v);
    v.normalize();
    Index steps = 0;
    Eigen::VectorXd w, lv;
    for (Index j = 0; j < m; ++j) {
      q.col(j) = v;
      ++steps;
      apply_laplacian(a, v, lv);
      w = 2.0 * v - lv;  // (I + A_hat) v
      alpha[j] = v.dot(w);
      // Two passes of classical Gram-Schmidt against the basis and the deflation space.
      for (int pass = 0; pass < 2; ++pass) {
        w -= q.leftCols(j + 1) * (q.leftCols(j + 1).transpose() * w);
        project(w);
      }
      beta[j] = w.norm();
      if (j + 1 == m || beta[j] < 1e-12) break;
      v = w / beta[j];
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
    for (Index j = 0; j < steps; ++j) {
      t(j, j) = alpha[j];
      if (j + 1 < steps) t(j, j + 1) = t(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(t);
    const Index k = std::min(count, steps);
    Eigenpairs out;
    out.values.resize(k);
    out.vectors.resize(n, k);
    for (Index j = 0; j < k; ++j) {
      const Index src = steps - 1 - j;  // largest of I + A_hat first
      out.values[j] = 2.0 - small.eigenvalues()[src];
      out.vectors.col(j) = (q.leftCols(steps) * small.eigenvectors().col(src)).normalized();
    }
    last_residual = max_residual(a, out);
    if (k == count && last_residual <= opt.tolerance) return out;
    if (m >= std::min(free_dim, opt.max_krylov)) break;
    m = std::min({2 * m, free_dim, opt.max_krylov});
  }
  std::ostringstream msg;
  msg << "Lanczos eigensolver did not converge: max residual " << last_residual << " > tolerance " << opt.tolerance
      << " with " << m << " Krylov vectors";
  throw NumericalError(msg.str());
}

}  // namespace detail

/// Smallest `count` eigenpairs of the symmetric normalized Laplacian I - A_hat.
/// Null vectors (one per non-trivial connected component) come first.
inline Eigenpairs laplacian_eigenpairs(const Graph& g, Index count, const EigenSolverOptions& opt = {}) {
  const Index n = g.num_nodes();
  if (count < 0 || count > n) throw InvalidArgument("laplacian_eigenpairs: count out of range");
  const auto a = normalize_adjacency(g);
  if (n <= opt.dense_limit) return detail::dense_laplacian_eigenpairs(a, count);

  const auto null_basis = detail::laplacian_null_basis(g);
  const Index trivial = std::min<Index>(count, static_cast<Index>(null_basis.size()));
  Eigenpairs out;
  out.values.resize(count);
  out.vectors.resize(n, count);
  for (Index j = 0; j < trivial; ++j) {
    out.values[j] = 0.0;
    out.vectors.col(j) = null_basis[j];
  }
  if (count > trivial) {
    auto rest = detail::lanczos_laplacian_eigenpairs(a, count - trivial, null_basis, opt);
    out.values.tail(count - trivial) = rest.values;
    out.vectors.rightCols(count - trivial) = rest.vectors;
  }
  return out;
}

/// Laplacian positional encoding: the `dim` eigenvectors of I - A_hat with the
/// smallest eigenvalues after the null space is dropped. Columns are unit-norm
/// with the largest-magnitude entry positive.
inline FeatureMatrix positional_encoding(const Graph& g, Index dim, const EigenSolverOptions& opt = {}) {
  const Index n = g.num_nodes();
  if (dim < 1 || dim >= n) throw InvalidArgument("positional_encoding: need 1 <= dim < num_nodes");
  const Index trivial = static_cast<Index>(detail::laplacian_null_basis(g).size());
  if (trivial + dim > n)
    throw InvalidArgument("positional_encoding: only " + std::to_string(n - trivial) + " non-trivial eigenvectors");
  const Eigenpairs e = laplacian_eigenpairs(g, trivial + dim, opt);
  const double residual = detail::max_residual(normalize_adjacency(g), e);
  if (residual > std::max(opt.tolerance, 1e-6)) {
    std::ostringstream msg;
    msg << "positional_encoding: eigenpair residual " << residual << " exceeds tolerance";
    throw NumericalError(msg.str());
  }
  FeatureMatrix pe(n, dim);
  for (Index j = 0; j < dim; ++j) {
    Eigen::VectorXd v = e.vectors.col(trivial + j).normalized();
    Index arg = 0;
    for (Index i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0) v = -v;
    pe.col(j) = v;
  }
  return pe;
}

}  // namespace mfplab
