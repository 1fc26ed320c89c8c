#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mfplab/graph.hpp"
#include "mfplab/seed.hpp"

namespace mfplab::testing {

// Erdos-Renyi style graph; when `connected`, a random spanning tree is laid first.
inline Graph random_graph(Index n, double p, std::uint64_t seed, bool connected = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<bool>> has(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n)));
  std::vector<Edge> edges;
  auto add = [&](Index a, Index b) {
    if (a == b || has[a][b]) return;
    has[a][b] = has[b][a] = true;
    edges.push_back({a, b});
  };
  if (connected) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (Index i = 1; i < n; ++i) add(order[i], order[static_cast<Index>(u(rng) * static_cast<double>(i)) % i]);
  }
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b)
      if (u(rng) < p) add(a, b);
  return Graph(n, std::move(edges));
}

inline FeatureMatrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  FeatureMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

inline Graph path_graph(Index n) {
  std::vector<Edge> e;
  for (Index i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
  return Graph(n, e);
}

inline Graph triangle() { return Graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mfplab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace mfplab::testing
