#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfplab/error.hpp"

namespace mfplab {

using Index = std::int64_t;

template <typename T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense |V| x d node attribute matrix, row-major (one row per node).
using FeatureMatrix = DenseMatrix<double>;

struct Edge {
  Index u = 0;
  Index v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Compressed sparse row matrix with real weights.
template <typename T>
struct CsrMatrix {
  Index rows = 0;
  std::vector<Index> row_ptr{0};
  std::vector<Index> col_idx;
  std::vector<T> values;

  Index nnz() const noexcept { return static_cast<Index>(col_idx.size()); }

  T coeff(Index i, Index j) const {
    auto first = col_idx.begin() + row_ptr[i];
    auto last = col_idx.begin() + row_ptr[i + 1];
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return T(0);
    return values[static_cast<std::size_t>(it - col_idx.begin())];
  }

  DenseMatrix<T> to_dense() const {
    DenseMatrix<T> m = DenseMatrix<T>::Zero(rows, rows);
    for (Index i = 0; i < rows; ++i)
      for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) m(i, col_idx[p]) = values[p];
    return m;
  }
};

/// Undirected, unweighted, simple graph. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from undirected edges. Each unordered pair may appear once;
  /// self-loops and out-of-range endpoints are rejected.
  Graph(Index num_nodes, std::vector<Edge> edges) : num_nodes_(num_nodes) {
    if (num_nodes < 0) throw InvalidArgument("negative node count");
    for (auto& e : edges) {
      if (e.u < 0 || e.v < 0 || e.u >= num_nodes || e.v >= num_nodes)
        throw InvalidArgument("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                              ") out of range for " + std::to_string(num_nodes) + " nodes");
      if (e.u == e.v) throw InvalidArgument("self-loop on node " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end());
    auto dup = std::adjacent_find(edges.begin(), edges.end());
    if (dup != edges.end())
      throw InvalidArgument("duplicate edge (" + std::to_string(dup->u) + "," + std::to_string(dup->v) + ")");
    edges_ = std::move(edges);

    std::vector<Index> degree(static_cast<std::size_t>(num_nodes), 0);
    for (const auto& e : edges_) {
      ++degree[e.u];
      ++degree[e.v];
    }
    row_ptr_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (Index i = 0; i < num_nodes; ++i) row_ptr_[i + 1] = row_ptr_[i] + degree[i];
    col_idx_.resize(static_cast<std::size_t>(row_ptr_.back()));
    std::vector<Index> cursor(row_ptr_.begin(), row_ptr_.end() - 1);
    for (const auto& e : edges_) {
      col_idx_[cursor[e.u]++] = e.v;
      col_idx_[cursor[e.v]++] = e.u;
    }
    for (Index i = 0; i < num_nodes; ++i)
      std::sort(col_idx_.begin() + row_ptr_[i], col_idx_.begin() + row_ptr_[i + 1]);
  }

  Index num_nodes() const noexcept { return num_nodes_; }
  /// Number of unordered edges.
  Index num_edges() const noexcept { return static_cast<Index>(edges_.size()); }
  /// Number of adjacency entries, i.e. each undirected edge counted in both directions.
  Index num_directed_edges() const noexcept { return 2 * num_edges(); }

  Index degree(Index i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  std::span<const Index> neighbors(Index i) const {
    return {col_idx_.data() + row_ptr_[i], static_cast<std::size_t>(degree(i))};
  }

  /// Canonical edge list, each pair stored once with u < v, sorted.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Index>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<Index>& col_idx() const noexcept { return col_idx_; }

  /// Relabels nodes: node i of this graph becomes node perm[i].
  Graph permuted(std::span<const Index> perm) const {
    std::vector<Edge> e;
    e.reserve(edges_.size());
    for (const auto& [u, v] : edges_) e.push_back({perm[u], perm[v]});
    return Graph(num_nodes_, std::move(e));
  }

 private:
  Index num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
};

struct LabelVector {
  std::vector<int> labels;
  int num_classes = 0;

  Index size() const noexcept { return static_cast<Index>(labels.size()); }
  int operator[](Index i) const { return labels[static_cast<std::size_t>(i)]; }

  void validate() const {
    if (num_classes < 1) throw InvalidArgument("num_classes must be positive");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] < 0 || labels[i] >= num_classes)
        throw InvalidArgument("label " + std::to_string(labels[i]) + " of node " + std::to_string(i) +
                              " outside [0," + std::to_string(num_classes) + ")");
  }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

/// Symmetric-normalized adjacency without self-loops: weight 1/sqrt(deg i * deg j)
/// on every edge. Isolated nodes have empty rows.
using NormalizedAdjacency = CsrMatrix<double>;

template <typename T = double>
CsrMatrix<T> normalize_adjacency(const Graph& g) {
  CsrMatrix<T> a;
  a.rows = g.num_nodes();
  a.row_ptr = g.row_ptr();
  a.col_idx = g.col_idx();
  a.values.resize(a.col_idx.size());
  for (Index i = 0; i < a.rows; ++i) {
    for (Index p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const Index j = a.col_idx[p];
      // Product of degrees is commutative, so (i,j) and (j,i) get bit-identical weights.
      const double w = 1.0 / std::sqrt(static_cast<double>(g.degree(i)) * static_cast<double>(g.degree(j)));
      a.values[p] = static_cast<T>(w);
    }
  }
  return a;
}

/// D~^{-1/2} (A + I) D~^{-1/2}, the propagation operator of a GCN layer.
template <typename T = double>
CsrMatrix<T> gcn_normalize_adjacency(const Graph& g) {
  const Index n = g.num_nodes();
  CsrMatrix<T> a;
  a.rows = n;
  a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  a.col_idx.reserve(static_cast<std::size_t>(g.num_directed_edges() + n));
  a.values.reserve(a.col_idx.capacity());
  auto dtilde = [&](Index i) { return static_cast<double>(g.degree(i) + 1); };
  for (Index i = 0; i < n; ++i) {
    bool self_done = false;
    auto emit = [&](Index j) {
      a.col_idx.push_back(j);
      a.values.push_back(static_cast<T>(1.0 / std::sqrt(dtilde(i) * dtilde(j))));
    };
    for (Index j : g.neighbors(i)) {
      if (!self_done && j > i) {
        emit(i);
        self_done = true;
      }
      emit(j);
    }
    if (!self_done) emit(i);
    a.row_ptr[i + 1] = static_cast<Index>(a.col_idx.size());
  }
  return a;
}

/// out = a * h for a sparse square `a` and row-major dense `h`.
template <typename T, typename U>
void spmm(const CsrMatrix<T>& a, const DenseMatrix<U>& h, DenseMatrix<U>& out) {
  if (h.rows() != a.rows) throw ShapeError("spmm: operand has " + std::to_string(h.rows()) +
                                           " rows, operator has " + std::to_string(a.rows));
  out.resize(h.rows(), h.cols());
  for (Index i = 0; i < a.rows; ++i) {
    auto row = out.row(i);
    row.setZero();
    for (Index p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p)
      row.noalias() += static_cast<U>(a.values[p]) * h.row(a.col_idx[p]);
  }
}

template <typename T, typename U>
DenseMatrix<U> spmm(const CsrMatrix<T>& a, const DenseMatrix<U>& h) {
  DenseMatrix<U> out;
  spmm(a, h, out);
  return out;
}

/// Fraction of edges whose endpoints share a label. Each undirected edge counted once.
inline double homophily(const Graph& g, const LabelVector& y) {
  if (y.size() != g.num_nodes()) throw ShapeError("homophily: label count does not match node count");
  if (g.num_edges() == 0) throw InvalidArgument("no edges");
  Index same = 0;
  for (const auto& e : g.edges()) same += (y[e.u] == y[e.v]) ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

/// Graph Dirichlet energy with degree-normalized differences:
/// 1/2 * sum over both edge directions of |x_i/sqrt(d_i) - x_j/sqrt(d_j)|^2
/// (degree 0 treated as 1).
inline double dirichlet_energy(const Graph& g, const FeatureMatrix& x) {
  if (x.rows() != g.num_nodes()) throw ShapeError("dirichlet_energy: feature rows do not match node count");
  auto scale = [&](Index i) { return 1.0 / std::sqrt(static_cast<double>(std::max<Index>(g.degree(i), 1))); };
  double energy = 0.0;
  for (const auto& e : g.edges())
    energy += (x.row(e.u) * scale(e.u) - x.row(e.v) * scale(e.v)).squaredNorm();
  return energy;
}

}  // namespace mfplab
