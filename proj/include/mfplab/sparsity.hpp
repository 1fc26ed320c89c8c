#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mfplab/csv.hpp"
#include "mfplab/error.hpp"
#include "mfplab/graph.hpp"
#include "mfplab/seed.hpp"

namespace mfplab {

/// The set of retained (node, column) entries of a rows x cols feature matrix.
/// Stored as sorted, unique row-major linear offsets.
class FeatureMask {
 public:
  FeatureMask() = default;

  FeatureMask(Index rows, Index cols, std::vector<std::uint64_t> offsets)
      : rows_(rows), cols_(cols), offsets_(std::move(offsets)) {
    std::sort(offsets_.begin(), offsets_.end());
    if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end())
      throw InvalidArgument("FeatureMask: duplicate entry");
    if (!offsets_.empty() && offsets_.back() >= total_entries())
      throw InvalidArgument("FeatureMask: entry out of range");
  }

  static FeatureMask all(Index rows, Index cols) {
    std::vector<std::uint64_t> o(static_cast<std::size_t>(rows * cols));
    std::iota(o.begin(), o.end(), std::uint64_t{0});
    return FeatureMask(rows, cols, std::move(o), sorted_tag{});
  }

  static FeatureMask from_coordinates(Index rows, Index cols, const std::vector<std::pair<Index, Index>>& coords) {
    std::vector<std::uint64_t> o;
    o.reserve(coords.size());
    for (auto [i, c] : coords) {
      if (i < 0 || c < 0 || i >= rows || c >= cols)
        throw InvalidArgument("FeatureMask: coordinate (" + std::to_string(i) + "," + std::to_string(c) +
                              ") out of range");
      o.push_back(static_cast<std::uint64_t>(i * cols + c));
    }
    return FeatureMask(rows, cols, std::move(o));
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  std::uint64_t total_entries() const noexcept { return static_cast<std::uint64_t>(rows_ * cols_); }
  std::size_t size() const noexcept { return offsets_.size(); }
  bool empty() const noexcept { return offsets_.empty(); }
  const std::vector<std::uint64_t>& offsets() const noexcept { return offsets_; }

  Index node(std::uint64_t offset) const { return static_cast<Index>(offset / static_cast<std::uint64_t>(cols_)); }
  Index column(std::uint64_t offset) const { return static_cast<Index>(offset % static_cast<std::uint64_t>(cols_)); }

  bool contains(Index i, Index c) const {
    return std::binary_search(offsets_.begin(), offsets_.end(), static_cast<std::uint64_t>(i * cols_ + c));
  }

  bool is_subset_of(const FeatureMask& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           std::includes(other.offsets_.begin(), other.offsets_.end(), offsets_.begin(), offsets_.end());
  }

  /// Number of retained entries per column.
  std::vector<Index> column_counts() const {
    std::vector<Index> counts(static_cast<std::size_t>(cols_), 0);
    for (auto o : offsets_) ++counts[static_cast<std::size_t>(column(o))];
    return counts;
  }

  template <typename Derived>
  void check_shape(const Eigen::MatrixBase<Derived>& m, const char* who) const {
    if (m.rows() != rows_ || m.cols() != cols_)
      throw ShapeError(std::string(who) + ": mask is " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                       ", matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }

  friend bool operator==(const FeatureMask&, const FeatureMask&) = default;

 private:
  struct sorted_tag {};
  FeatureMask(Index rows, Index cols, std::vector<std::uint64_t> offsets, sorted_tag)
      : rows_(rows), cols_(cols), offsets_(std::move(offsets)) {}

  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<std::uint64_t> offsets_;
};

struct NoiseSpec {
  double mean = 0.0;
  double variance = 1.0;

  void validate() const {
    if (!(variance >= 0.0) || !std::isfinite(variance) || !std::isfinite(mean))
      throw InvalidArgument("noise variance must be finite and >= 0");
  }
};

/// Keeps exactly round(keep_fraction * rows * cols) entries, drawn uniformly
/// without replacement over the whole matrix.
inline FeatureMask sample_retained(Index rows, Index cols, double keep_fraction, SeedStream seed) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) throw InvalidArgument("keep_fraction must lie in [0,1]");
  const auto total = static_cast<std::uint64_t>(rows * cols);
  const auto count = static_cast<std::uint64_t>(std::llround(keep_fraction * static_cast<double>(total)));
  std::vector<std::uint64_t> offsets;
  offsets.reserve(count);
  auto rng = seed.engine();
  // Selection sampling over 0..total-1; output is sorted by construction.
  using Dist = std::uniform_int_distribution<std::uint64_t>;
  Dist dist;
  std::uint64_t needed = count;
  for (std::uint64_t i = 0; i < total && needed > 0; ++i) {
    if (dist(rng, Dist::param_type(0, total - i - 1)) < needed) {
      offsets.push_back(i);
      --needed;
    }
  }
  return FeatureMask(rows, cols, std::move(offsets));
}

/// Fills `out` with i.i.d. N(mean, variance) draws in row-major order.
template <typename Derived>
void fill_gaussian(Eigen::MatrixBase<Derived>& out, const NoiseSpec& noise, SeedStream seed) {
  noise.validate();
  auto rng = seed.engine();
  std::normal_distribution<double> dist(noise.mean, std::sqrt(noise.variance));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = dist(rng);
}

/// Retained entries copied from `x`, every other entry replaced by Gaussian noise.
inline FeatureMatrix stochastic_sparse_sample(const FeatureMatrix& x, const FeatureMask& k, const NoiseSpec& noise,
                                              SeedStream seed) {
  k.check_shape(x, "stochastic_sparse_sample");
  FeatureMatrix out(x.rows(), x.cols());
  fill_gaussian(out, noise, seed);
  const double* src = x.data();
  double* dst = out.data();
  for (auto o : k.offsets()) dst[o] = src[o];
  return out;
}

/// Per-view subset of `k`: every entry kept independently with probability p.
inline FeatureMask sample_view_subset(const FeatureMask& k, double p, SeedStream seed, std::uint64_t view_index) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("view sampling ratio p must lie in [0,1]");
  auto rng = seed.derive("view-subset", view_index).engine();
  std::bernoulli_distribution keep(p);
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(k.size()) * p) + 16);
  for (auto o : k.offsets())
    if (keep(rng)) out.push_back(o);
  return FeatureMask(k.rows(), k.cols(), std::move(out));
}

/// "node,col" per retained entry, no header.
inline void write_mask_csv(const FeatureMask& k, const std::filesystem::path& path) {
  std::string out;
  for (auto o : k.offsets()) {
    out += std::to_string(k.node(o));
    out += ',';
    out += std::to_string(k.column(o));
    out += '\n';
  }
  csv::write_file(path, out);
}

inline FeatureMask read_mask_csv(const std::filesystem::path& path, Index rows, Index cols) {
  const std::string text = csv::read_file(path);
  std::vector<std::pair<Index, Index>> coords;
  Index line_no = 0;
  for (auto line : csv::lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    Index v[2] = {0, 0};
    int n = 0;
    bool ok = true;
    csv::for_each_field(line, [&](std::size_t j, std::string_view f) {
      ++n;
      if (j < 2) ok = ok && csv::parse_number(f, v[j]);
    });
    if (!ok || n != 2) throw LoadError(path.filename().string() + ": malformed line " + std::to_string(line_no));
    coords.emplace_back(v[0], v[1]);
  }
  try {
    return FeatureMask::from_coordinates(rows, cols, coords);
  } catch (const InvalidArgument& e) {
    throw LoadError(path.filename().string() + ": " + e.what());
  }
}

}  // namespace mfplab
