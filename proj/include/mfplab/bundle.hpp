#pragma once

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <string>

#include "mfplab/csv.hpp"
#include "mfplab/error.hpp"
#include "mfplab/graph.hpp"

namespace mfplab {

/// A dataset on disk: a directory holding meta.json, edges.csv, features.csv
/// and labels.csv.
///
///   meta.json     {"name", "num_nodes", "num_features", "num_classes"}
///   edges.csv     "src,dst" per undirected edge, 0-based, no header
///   features.csv  num_nodes rows of num_features comma-separated reals
///   labels.csv    num_nodes rows, one integer class id each
struct Bundle {
  std::string name;
  Graph graph;
  FeatureMatrix features;
  LabelVector labels;
};

inline Bundle load_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw LoadError("bundle directory not found: " + dir.string());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(csv::read_file(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("meta.json: " + std::string(e.what()));
  }
  Bundle b;
  Index num_nodes = 0, num_features = 0;
  try {
    b.name = meta.value("name", dir.filename().string());
    num_nodes = meta.at("num_nodes").get<Index>();
    num_features = meta.at("num_features").get<Index>();
    b.labels.num_classes = meta.at("num_classes").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("meta.json: " + std::string(e.what()));
  }
  if (num_nodes < 0 || num_features < 0 || b.labels.num_classes < 1)
    throw LoadError("meta.json: dimensions must be non-negative and num_classes positive");

  std::vector<Edge> edges;
  {
    const std::string text = csv::read_file(dir / "edges.csv");
    Index line_no = 0;
    for (auto line : csv::lines(text)) {
      ++line_no;
      if (line.empty()) continue;
      Index vals[2] = {0, 0};
      int count = 0;
      bool ok = true;
      csv::for_each_field(line, [&](std::size_t j, std::string_view f) {
        ++count;
        if (j < 2) ok = ok && csv::parse_number(f, vals[j]);
      });
      if (!ok || count != 2) throw LoadError("edges.csv: malformed line " + std::to_string(line_no));
      edges.push_back({vals[0], vals[1]});
    }
  }
  try {
    b.graph = Graph(num_nodes, std::move(edges));
  } catch (const InvalidArgument& e) {
    throw LoadError(std::string("edges.csv: ") + e.what());
  }

  b.features = csv::read_matrix(dir / "features.csv", num_nodes, num_features);
  if (!b.features.allFinite()) throw LoadError("features.csv: non-finite value");

  {
    const std::string text = csv::read_file(dir / "labels.csv");
    const auto rows = csv::lines(text);
    if (static_cast<Index>(rows.size()) != num_nodes)
      throw LoadError("labels.csv: expected " + std::to_string(num_nodes) + " rows, found " +
                      std::to_string(rows.size()));
    b.labels.labels.resize(static_cast<std::size_t>(num_nodes));
    for (Index i = 0; i < num_nodes; ++i)
      if (!csv::parse_number(rows[i], b.labels.labels[i]))
        throw LoadError("labels.csv: bad label at line " + std::to_string(i + 1));
  }
  try {
    b.labels.validate();
  } catch (const InvalidArgument& e) {
    throw LoadError(std::string("labels.csv: ") + e.what());
  }
  return b;
}

inline void save_bundle(const Bundle& b, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (b.features.rows() != b.graph.num_nodes() || b.labels.size() != b.graph.num_nodes())
    throw ShapeError("save_bundle: graph, features and labels disagree on node count");
  fs::create_directories(dir);

  nlohmann::ordered_json meta;
  meta["name"] = b.name;
  meta["num_nodes"] = b.graph.num_nodes();
  meta["num_features"] = b.features.cols();
  meta["num_classes"] = b.labels.num_classes;
  csv::write_file(dir / "meta.json", meta.dump(2) + "\n");

  std::string edges;
  for (const auto& e : b.graph.edges()) {
    edges += std::to_string(e.u);
    edges += ',';
    edges += std::to_string(e.v);
    edges += '\n';
  }
  csv::write_file(dir / "edges.csv", edges);
  csv::write_matrix(dir / "features.csv", b.features);

  std::string labels;
  for (int y : b.labels.labels) {
    labels += std::to_string(y);
    labels += '\n';
  }
  csv::write_file(dir / "labels.csv", labels);
}

}  // namespace mfplab
