#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfplab/bundle.hpp"
#include "mfplab/error.hpp"
#include "mfplab/graph.hpp"
#include "mfplab/seed.hpp"

namespace mfplab {

/// Homophily-controlled synthetic graph: balanced classes, 2-D class-conditional
/// Gaussian features, edges grown by sequential attachment.
struct SynthConfig {
  Index num_nodes = 5000;
  int num_classes = 10;
  double target_homophily = 0.5;
  int edges_per_node = 2;
  double feature_spread = 2.0;  // radius of the circle holding the class means
  SeedStream seed{};

  void validate() const {
    if (num_classes < 2) throw InvalidArgument("synth: num_classes must be >= 2");
    if (num_nodes < 1) throw InvalidArgument("synth: num_nodes must be >= 1");
    if (!(target_homophily >= 0.0 && target_homophily <= 1.0))
      throw InvalidArgument("synth: target homophily must lie in [0,1]");
    if (edges_per_node < 1) throw InvalidArgument("synth: edges_per_node must be >= 1");
    if (!(feature_spread >= 0.0)) throw InvalidArgument("synth: feature_spread must be >= 0");
  }
};

/// Balanced labels in shuffled order and 2-D features drawn around per-class
/// means on a circle of radius `feature_spread` with unit covariance.
inline void synth_nodes(const SynthConfig& cfg, FeatureMatrix& features, LabelVector& labels) {
  const Index n = cfg.num_nodes;
  labels.num_classes = cfg.num_classes;
  labels.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels.labels[i] = static_cast<int>(i % cfg.num_classes);
  auto label_rng = cfg.seed.derive("labels").engine();
  std::shuffle(labels.labels.begin(), labels.labels.end(), label_rng);

  features.resize(n, 2);
  auto rng = cfg.seed.derive("features").engine();
  std::normal_distribution<double> normal;
  for (Index i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * labels[i] / cfg.num_classes;
    features(i, 0) = cfg.feature_spread * std::cos(angle) + normal(rng);
    features(i, 1) = cfg.feature_spread * std::sin(angle) + normal(rng);
  }
}

/// Edges by sequential attachment. Node v links to up to `edges_per_node`
/// distinct earlier nodes; each draw is same-class with probability h, else
/// cross-class, uniform within the chosen pool. An empty pool falls back to
/// the other pool only when that pool has positive probability, so h = 0 and
/// h = 1 are met exactly.
inline Graph synth_edges(const LabelVector& labels, const SynthConfig& cfg, SeedStream seed) {
  const Index n = labels.size();
  const double h = cfg.target_homophily;
  auto rng = seed.engine();
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(labels.num_classes));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n * cfg.edges_per_node));
  Index seen = 0;  // nodes already placed

  auto pick_same = [&](int c) -> Index {
    const auto& pool = by_class[c];
    return pool[static_cast<std::size_t>(unit(rng) * static_cast<double>(pool.size())) % pool.size()];
  };
  // Uniform over placed nodes of any other class: rejection on the placed prefix.
  auto pick_other = [&](int c, Index placed) -> Index {
    while (true) {
      const Index u = static_cast<Index>(unit(rng) * static_cast<double>(placed)) % placed;
      if (labels[u] != c) return u;
    }
  };

  for (Index v = 0; v < n; ++v, ++seen) {
    const int c = labels[v];
    const Index same_avail = static_cast<Index>(by_class[c].size());
    const Index other_avail = seen - same_avail;
    std::vector<Index> chosen;
    for (int e = 0; e < cfg.edges_per_node; ++e) {
      for (int attempt = 0; attempt < 64; ++attempt) {
        bool same = unit(rng) < h;
        if (same && same_avail == 0) {
          if (h >= 1.0 || other_avail == 0) break;
          same = false;
        } else if (!same && other_avail == 0) {
          if (h <= 0.0 || same_avail == 0) break;
          same = true;
        }
        const Index u = same ? pick_same(c) : pick_other(c, seen);
        if (std::find(chosen.begin(), chosen.end(), u) == chosen.end()) {
          chosen.push_back(u);
          break;
        }
      }
    }
    for (Index u : chosen) edges.push_back({u, v});
    by_class[c].push_back(v);
  }
  return Graph(n, std::move(edges));
}

inline Bundle generate(const SynthConfig& cfg) {
  cfg.validate();
  Bundle b;
  synth_nodes(cfg, b.features, b.labels);
  b.graph = synth_edges(b.labels, cfg, cfg.seed.derive("edges"));
  std::ostringstream name;
  name << "synth-h" << cfg.target_homophily;
  b.name = name.str();
  return b;
}

inline std::string family_member_name(double target) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "synth-h%.2f", target);
  return buf;
}

/// One shared feature/label draw; an edge set per target.
inline std::vector<Bundle> generate_family(const SynthConfig& base, const std::vector<double>& targets) {
  if (targets.empty()) throw InvalidArgument("generate_family: no homophily targets");
  base.validate();
  FeatureMatrix features;
  LabelVector labels;
  synth_nodes(base, features, labels);
  std::vector<Bundle> family;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    SynthConfig cfg = base;
    cfg.target_homophily = targets[i];
    cfg.validate();
    Bundle b;
    b.name = family_member_name(targets[i]);
    b.features = features;
    b.labels = labels;
    b.graph = synth_edges(labels, cfg, base.seed.derive("family-edges", i));
    family.push_back(std::move(b));
  }
  return family;
}

struct FamilyMember {
  std::filesystem::path path;
  double target = 0.0;
  double measured = 0.0;
};

/// Writes each member as a bundle under `dir` plus a family.json index that
/// records the generator parameters.
inline std::vector<FamilyMember> write_family(const std::vector<Bundle>& family, const std::vector<double>& targets,
                                              const SynthConfig& base, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::ordered_json index;
  index["generator"] = {{"kind", "sequential-attachment"},
                        {"num_nodes", base.num_nodes},
                        {"num_classes", base.num_classes},
                        {"edges_per_node", base.edges_per_node},
                        {"feature_spread", base.feature_spread},
                        {"seed", base.seed.seed()}};
  std::vector<FamilyMember> members;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const fs::path sub = family[i].name;
    save_bundle(family[i], dir / sub);
    const double measured = homophily(family[i].graph, family[i].labels);
    members.push_back({dir / sub, targets[i], measured});
    index["members"].push_back({{"path", sub.string()},
                                {"target_homophily", targets[i]},
                                {"measured_homophily", measured},
                                {"num_edges", family[i].graph.num_edges()}});
  }
  csv::write_file(dir / "family.json", index.dump(2) + "\n");
  return members;
}

inline std::vector<FamilyMember> read_family(const std::filesystem::path& dir) {
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(csv::read_file(dir / "family.json"));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("family.json: " + std::string(e.what()));
  }
  std::vector<FamilyMember> out;
  for (const auto& m : index.at("members"))
    out.push_back({dir / m.at("path").get<std::string>(), m.at("target_homophily").get<double>(),
                   m.value("measured_homophily", 0.0)});
  return out;
}

}  // namespace mfplab
