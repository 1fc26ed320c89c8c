#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfplab/bundle.hpp"
#include "mfplab/error.hpp"
#include "mfplab/gcn.hpp"
#include "mfplab/graph.hpp"
#include "mfplab/metrics.hpp"
#include "mfplab/positional_encoding.hpp"
#include "mfplab/propagation.hpp"
#include "mfplab/sparsity.hpp"
#include "mfplab/synth.hpp"

namespace mfplab {

inline const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s = {"performance", "privacy", "sensitivity-homophily", "sensitivity-eta",
                                             "sensitivity-gamma"};
  return s;
}

inline const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> m = {"mfp", "fp", "rfp", "lp", "pe", "gcn-full"};
  return m;
}

struct ExperimentSpec {
  std::string suite = "performance";
  std::vector<std::filesystem::path> datasets;
  std::vector<std::string> methods = {"mfp", "fp"};
  int runs = 10;
  double keep_fraction = 0.01;
  PropagationConfig propagation{};
  TrainConfig train{};
  Index rfp_dim = 16;
  int rfp_eta = 10;
  int rfp_gamma = 40;
  Index pe_dim = 16;
  int lp_gamma = 40;
  int train_per_class = 20;
  Index val_size = 1500;
  double train_fraction = 0.8;
  std::vector<double> sweep_values;  // empty: suite defaults
  std::filesystem::path out_dir = "results";
  std::uint64_t master_seed = 0;

  void validate() const {
    if (std::find(known_suites().begin(), known_suites().end(), suite) == known_suites().end())
      throw Error("spec.suite", "unknown suite '" + suite + "'");
    if (runs < 1) throw InvalidArgument("runs must be >= 1");
    if (datasets.empty()) throw InvalidArgument("no dataset given");
    if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) throw InvalidArgument("keep fraction must lie in [0,1]");
    for (const auto& m : methods)
      if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end())
        throw Error("spec.method", "unknown method '" + m + "'");
    for (const auto& d : datasets)
      if (!std::filesystem::exists(d)) throw LoadError("dataset path does not exist: " + d.string());
    propagation.validate();
    train.validate();
  }
};

inline nlohmann::ordered_json to_json(const ExperimentSpec& s) {
  nlohmann::ordered_json j;
  j["suite"] = s.suite;
  j["datasets"] = nlohmann::json::array();
  for (const auto& d : s.datasets) j["datasets"].push_back(d.string());
  j["methods"] = s.methods;
  j["runs"] = s.runs;
  j["keep_fraction"] = s.keep_fraction;
  j["eta"] = s.propagation.eta;
  j["gamma"] = s.propagation.gamma;
  j["p"] = s.propagation.p;
  j["noise_mean"] = s.propagation.noise.mean;
  j["noise_var"] = s.propagation.noise.variance;
  j["epochs"] = s.train.epochs;
  j["lr"] = s.train.learning_rate;
  j["hidden"] = s.train.hidden_dim;
  j["dropout"] = s.train.dropout_rate;
  j["weight_decay"] = s.train.weight_decay;
  j["adam_beta1"] = s.train.adam_beta1;
  j["adam_beta2"] = s.train.adam_beta2;
  j["adam_epsilon"] = s.train.adam_epsilon;
  j["rfp_dim"] = s.rfp_dim;
  j["rfp_eta"] = s.rfp_eta;
  j["rfp_gamma"] = s.rfp_gamma;
  j["pe_dim"] = s.pe_dim;
  j["lp_gamma"] = s.lp_gamma;
  j["train_per_class"] = s.train_per_class;
  j["val_size"] = s.val_size;
  j["train_fraction"] = s.train_fraction;
  j["sweep_values"] = s.sweep_values;
  j["out"] = s.out_dir.string();
  j["seed"] = s.master_seed;
  return j;
}

/// Overlays the keys present in `j` onto `s`; unknown keys are rejected.
inline void apply_json(ExperimentSpec& s, const nlohmann::json& j) {
  static const std::vector<std::string> keys = {
      "suite", "datasets", "methods", "runs", "keep_fraction", "eta", "gamma", "p", "noise_mean", "noise_var",
      "epochs", "lr", "hidden", "dropout", "weight_decay", "adam_beta1", "adam_beta2", "adam_epsilon", "rfp_dim",
      "rfp_eta", "rfp_gamma", "pe_dim", "lp_gamma", "train_per_class", "val_size", "train_fraction",
      "sweep_values", "out", "seed"};
  if (!j.is_object()) throw Error("config", "config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw Error("config", "unknown config key '" + k + "'");
  try {
    auto opt = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("suite", s.suite);
    if (j.contains("datasets")) {
      s.datasets.clear();
      for (const auto& d : j.at("datasets")) s.datasets.emplace_back(d.get<std::string>());
    }
    opt("methods", s.methods);
    opt("runs", s.runs);
    opt("keep_fraction", s.keep_fraction);
    opt("eta", s.propagation.eta);
    opt("gamma", s.propagation.gamma);
    opt("p", s.propagation.p);
    opt("noise_mean", s.propagation.noise.mean);
    opt("noise_var", s.propagation.noise.variance);
    opt("epochs", s.train.epochs);
    opt("lr", s.train.learning_rate);
    opt("hidden", s.train.hidden_dim);
    opt("dropout", s.train.dropout_rate);
    opt("weight_decay", s.train.weight_decay);
    opt("adam_beta1", s.train.adam_beta1);
    opt("adam_beta2", s.train.adam_beta2);
    opt("adam_epsilon", s.train.adam_epsilon);
    opt("rfp_dim", s.rfp_dim);
    opt("rfp_eta", s.rfp_eta);
    opt("rfp_gamma", s.rfp_gamma);
    opt("pe_dim", s.pe_dim);
    opt("lp_gamma", s.lp_gamma);
    opt("train_per_class", s.train_per_class);
    opt("val_size", s.val_size);
    opt("train_fraction", s.train_fraction);
    opt("sweep_values", s.sweep_values);
    if (j.contains("out")) s.out_dir = j.at("out").get<std::string>();
    opt("seed", s.master_seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config", std::string("bad config value: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Splits

/// `per_class` training nodes from every class, then `val_size` validation
/// nodes, the rest test. Throws naming the first class that is too small.
inline Split planetoid_split(const LabelVector& y, int per_class, Index val_size, SeedStream seed) {
  auto rng = seed.engine();
  std::vector<Index> order(static_cast<std::size_t>(y.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> taken(static_cast<std::size_t>(y.num_classes), 0);
  std::vector<Index> counts(static_cast<std::size_t>(y.num_classes), 0);
  for (int c : y.labels) ++counts[c];
  for (int c = 0; c < y.num_classes; ++c)
    if (counts[c] < per_class)
      throw Error("split.class_too_small", "class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                                               " nodes, fewer than the " + std::to_string(per_class) +
                                               " training nodes required");
  Split s;
  std::vector<Index> rest;
  for (Index i : order) {
    if (taken[y[i]] < per_class) {
      ++taken[y[i]];
      s.train.push_back(i);
    } else {
      rest.push_back(i);
    }
  }
  if (static_cast<Index>(rest.size()) <= val_size)
    throw Error("split.too_small", "graph too small for " + std::to_string(val_size) + " validation nodes");
  s.val.assign(rest.begin(), rest.begin() + val_size);
  s.test.assign(rest.begin() + val_size, rest.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// Random train/test split with no validation set.
inline Split ratio_split(Index n, double train_fraction, SeedStream seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train fraction must lie in (0,1)");
  auto rng = seed.engine();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= order.size()) throw InvalidArgument("split leaves an empty train or test set");
  Split s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

// ---------------------------------------------------------------------------
// Reports

struct RunRecord {
  int run = 0;
  std::string method;
  std::string dataset;
  std::string sweep_key;  // empty for the performance/privacy suites
  double sweep_value = 0.0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double wall_seconds = 0.0;
};

struct AggregateRecord {
  std::string method;
  std::string dataset;
  std::string sweep_key;
  double sweep_value = 0.0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  int runs = 0;
};

struct ExperimentReport {
  std::string suite;
  nlohmann::ordered_json config;
  nlohmann::ordered_json metadata;
  std::vector<RunRecord> runs;
  std::vector<AggregateRecord> aggregates;
};

struct PrivacyRunExposure {
  int run = 0;
  ExposureReport report;
};

struct PrivacyRunCrossRep {
  int run = 0;
  std::string dataset;
  CrossRepReport report;
};

struct PrivacyReport {
  ExperimentReport experiment;
  std::vector<PrivacyRunExposure> exposures;
  std::vector<PrivacyRunCrossRep> cross_representation;
};

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

/// Groups per-run rows by (method, dataset, sweep point) in first-seen order.
inline std::vector<AggregateRecord> aggregate(const std::vector<RunRecord>& runs) {
  struct Group {
    const RunRecord* first;
    std::vector<double> acc, f1;
  };
  std::vector<Group> groups;
  for (const auto& r : runs) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
      return g.first->method == r.method && g.first->dataset == r.dataset && g.first->sweep_key == r.sweep_key &&
             g.first->sweep_value == r.sweep_value;
    });
    if (it == groups.end()) {
      groups.push_back({&r, {}, {}});
      it = groups.end() - 1;
    }
    it->acc.push_back(r.accuracy);
    it->f1.push_back(r.macro_f1);
  }
  std::vector<AggregateRecord> out;
  for (const auto& g : groups) {
    for (const auto& [metric, values] : {std::pair{"accuracy", &g.acc}, std::pair{"macro_f1", &g.f1}}) {
      auto [m, s] = mean_std(*values);
      out.push_back({g.first->method, g.first->dataset, g.first->sweep_key, g.first->sweep_value, metric, m, s,
                     static_cast<int>(values->size())});
    }
  }
  return out;
}

inline nlohmann::ordered_json report_metadata() {
  nlohmann::ordered_json m;
  m["f1_averaging"] = "macro";
  m["model_selection"] = "final-epoch parameters; validation accuracy is logged only";
  m["weight_init"] = "glorot-uniform weights, zero biases";
  m["gcn_normalization"] = "self-loop augmented symmetric";
  m["propagation_normalization"] = "symmetric, no self-loops";
  m["view_subset_sampling"] = "bernoulli(p) per retained entry";
  m["view_noise"] = "fresh gaussian draw per view";
  m["std"] = "population (ddof=0)";
  m["gcn_full_split"] = "same split as the sparse methods";
  m["exposure_columns"] = "all columns; per-column retained count included";
  m["random_similarity_rule"] = "medians within 25% relative";
  m["mask_resampling"] = "fresh retained set per run";
  return m;
}

namespace detail {

inline std::string fmt(double v) {
  std::string s;
  csv::append_number(s, v);
  return s;
}

inline std::string dataset_name(const Bundle& b, const std::filesystem::path& p) {
  return b.name.empty() ? p.filename().string() : b.name;
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Evaluation {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

inline Evaluation train_and_evaluate(const Graph& g, const FeatureMatrix& x, const LabelVector& y, const Split& split,
                                     const TrainConfig& cfg) {
  const DenseMatrix<float> xf = x.cast<float>();
  const auto model = train<float>(g, xf, y, split.train, split.val, cfg);
  const LabelVector pred = predict(model.params, g, xf);
  return {accuracy(y, pred, split.test), macro_f1(y, pred, split.test)};
}

inline std::uint64_t method_index(const std::string& m) {
  const auto& all = known_methods();
  return static_cast<std::uint64_t>(std::find(all.begin(), all.end(), m) - all.begin());
}

}  // namespace detail

using ProgressFn = std::function<void(const std::string&)>;

/// Builds a method's representation for one run, trains the downstream GCN
/// (LP is evaluated directly) and returns test metrics.
class MethodRunner {
 public:
  MethodRunner(const Bundle& b, const ExperimentSpec& spec) : b_(b), spec_(spec), a_hat_(normalize_adjacency(b.graph)) {}

  const NormalizedAdjacency& a_hat() const { return a_hat_; }

  detail::Evaluation run(const std::string& method, const Split& split, const FeatureMask& mask,
                         const PropagationConfig& prop, SeedStream run_seed) {
    TrainConfig tc = spec_.train;
    tc.seed = run_seed.derive("train", detail::method_index(method));
    const auto& g = b_.graph;
    if (method == "lp") {
      const auto r = label_propagate(g, b_.labels, split.train, spec_.lp_gamma);
      return {accuracy(b_.labels, r.predictions, split.test), macro_f1(b_.labels, r.predictions, split.test)};
    }
    if (method == "gcn-full") return detail::train_and_evaluate(g, b_.features, b_.labels, split, tc);
    if (method == "fp") return detail::train_and_evaluate(g, fp(b_.features, mask, a_hat_, prop.gamma), b_.labels, split, tc);
    if (method == "mfp") {
      PropagationConfig pc = prop;
      pc.seed = run_seed.derive("mfp");
      return detail::train_and_evaluate(g, mfp(b_.features, mask, a_hat_, pc).matrix, b_.labels, split, tc);
    }
    if (method == "rfp")
      return detail::train_and_evaluate(
          g, rfp(a_hat_, spec_.rfp_dim, spec_.rfp_eta, spec_.rfp_gamma, run_seed.derive("rfp")).matrix, b_.labels,
          split, tc);
    if (method == "pe") {
      if (!pe_) pe_ = positional_encoding(g, spec_.pe_dim);
      return detail::train_and_evaluate(g, *pe_, b_.labels, split, tc);
    }
    throw Error("spec.method", "unknown method '" + method + "'");
  }

 private:
  const Bundle& b_;
  const ExperimentSpec& spec_;
  NormalizedAdjacency a_hat_;
  std::optional<FeatureMatrix> pe_;
};

/// Planetoid-style protocol: per run a fresh 20-per-class / 1500 / rest split and
/// a fresh retained mask; every requested method is evaluated on the test nodes.
inline ExperimentReport run_performance(const ExperimentSpec& spec, const ProgressFn& progress = {}) {
  spec.validate();
  ExperimentReport rep{"performance", to_json(spec), report_metadata(), {}, {}};
  const SeedStream master(spec.master_seed);
  for (const auto& path : spec.datasets) {
    const Bundle b = load_bundle(path);
    const std::string name = detail::dataset_name(b, path);
    MethodRunner runner(b, spec);
    for (int r = 0; r < spec.runs; ++r) {
      const SeedStream run_seed = master.derive("performance", static_cast<std::uint64_t>(r));
      const Split split = planetoid_split(b.labels, spec.train_per_class, spec.val_size, run_seed.derive("split"));
      const FeatureMask mask =
          sample_retained(b.graph.num_nodes(), b.features.cols(), spec.keep_fraction, run_seed.derive("mask"));
      for (const auto& m : spec.methods) {
        const auto t0 = detail::Clock::now();
        const auto ev = runner.run(m, split, mask, spec.propagation, run_seed);
        rep.runs.push_back({r, m, name, "", 0.0, ev.accuracy, ev.macro_f1, detail::seconds_since(t0)});
        if (progress)
          progress(name + " run " + std::to_string(r) + " " + m + " acc=" + detail::fmt(ev.accuracy));
      }
    }
  }
  rep.aggregates = aggregate(rep.runs);
  return rep;
}

/// Exposure audit and cross-representation protocol on 80/20 splits.
inline PrivacyReport run_privacy(const ExperimentSpec& spec, const ProgressFn& progress = {}) {
  spec.validate();
  PrivacyReport out;
  out.experiment = {"privacy", to_json(spec), report_metadata(), {}, {}};
  const SeedStream master(spec.master_seed);
  for (const auto& path : spec.datasets) {
    const Bundle b = load_bundle(path);
    const std::string name = detail::dataset_name(b, path);
    MethodRunner runner(b, spec);
    for (int r = 0; r < spec.runs; ++r) {
      const SeedStream run_seed = master.derive("privacy", static_cast<std::uint64_t>(r));
      const Split split = ratio_split(b.graph.num_nodes(), spec.train_fraction, run_seed.derive("split"));
      const FeatureMask mask =
          sample_retained(b.graph.num_nodes(), b.features.cols(), spec.keep_fraction, run_seed.derive("mask"));
      const auto retained = mask.column_counts();

      const FeatureMatrix fp_out = fp(b.features, mask, runner.a_hat(), spec.propagation.gamma);
      PropagationConfig pc = spec.propagation;
      pc.seed = run_seed.derive("mfp");
      const MultiViewRepresentation mfp_out = mfp(b.features, mask, runner.a_hat(), pc);

      auto random = random_baseline_exposure(b.features, run_seed.derive("random"), name);
      for (auto& row : random.rows) row.retained = retained[static_cast<std::size_t>(row.column)];
      out.exposures.push_back({r, std::move(random)});
      out.exposures.push_back({r, measure_exposure(b.features, fp_out, "fp", name, retained)});
      out.exposures.push_back({r, measure_exposure(b.features, mfp_out.matrix, "mfp", name, retained)});

      TrainConfig tc = spec.train;
      tc.seed = run_seed.derive("cross-representation");
      out.cross_representation.push_back({r, name, cross_representation<float>(b.graph, b.features, fp_out, b.labels, split, tc)});

      for (const auto& m : spec.methods) {
        const auto t0 = detail::Clock::now();
        detail::Evaluation ev;
        TrainConfig mc = spec.train;
        mc.seed = run_seed.derive("train", detail::method_index(m));
        if (m == "fp")
          ev = detail::train_and_evaluate(b.graph, fp_out, b.labels, split, mc);
        else if (m == "mfp")
          ev = detail::train_and_evaluate(b.graph, mfp_out.matrix, b.labels, split, mc);
        else
          ev = runner.run(m, split, mask, spec.propagation, run_seed);
        out.experiment.runs.push_back({r, m, name, "", 0.0, ev.accuracy, ev.macro_f1, detail::seconds_since(t0)});
        if (progress) progress(name + " run " + std::to_string(r) + " " + m + " acc=" + detail::fmt(ev.accuracy));
      }
    }
  }
  out.experiment.aggregates = aggregate(out.experiment.runs);
  return out;
}

inline std::vector<double> default_sweep(const std::string& suite) {
  if (suite == "sensitivity-eta") return {1, 2, 5, 10, 15, 20};
  if (suite == "sensitivity-gamma") return {2, 4, 8, 16, 32, 64, 128};
  return {};
}

/// Sweeps eta, gamma, or homophily (family members) for fp and mfp on 80/20
/// splits. Every sweep point of a run shares the run's split and mask.
inline ExperimentReport run_sensitivity(const ExperimentSpec& spec, const ProgressFn& progress = {}) {
  spec.validate();
  if (spec.suite != "sensitivity-eta" && spec.suite != "sensitivity-gamma" && spec.suite != "sensitivity-homophily")
    throw Error("spec.sweep", "unknown sweep key for suite '" + spec.suite + "'");
  ExperimentReport rep{spec.suite, to_json(spec), report_metadata(), {}, {}};
  const SeedStream master(spec.master_seed);
  std::vector<std::string> methods;
  for (const auto& m : spec.methods)
    if (m == "fp" || m == "mfp") methods.push_back(m);
  if (methods.empty()) throw Error("spec.method", "sensitivity suites evaluate fp and/or mfp");

  struct Point {
    std::filesystem::path path;
    double value;
  };
  std::vector<Point> datasets;
  std::string key;
  if (spec.suite == "sensitivity-homophily") {
    key = "homophily";
    for (const auto& d : spec.datasets) {
      if (std::filesystem::exists(d / "family.json")) {
        for (const auto& m : read_family(d)) datasets.push_back({m.path, m.target});
      } else {
        const Bundle b = load_bundle(d);
        datasets.push_back({d, homophily(b.graph, b.labels)});
      }
    }
    if (!spec.sweep_values.empty())
      std::erase_if(datasets, [&](const Point& p) {
        return std::none_of(spec.sweep_values.begin(), spec.sweep_values.end(),
                            [&](double v) { return std::abs(v - p.value) < 1e-9; });
      });
  } else {
    key = spec.suite == "sensitivity-eta" ? "eta" : "gamma";
    for (const auto& d : spec.datasets) datasets.push_back({d, 0.0});
  }
  const std::vector<double> values = spec.sweep_values.empty() ? default_sweep(spec.suite) : spec.sweep_values;

  for (const auto& ds : datasets) {
    const Bundle b = load_bundle(ds.path);
    const std::string name = detail::dataset_name(b, ds.path);
    const auto a_hat = normalize_adjacency(b.graph);
    for (int r = 0; r < spec.runs; ++r) {
      const SeedStream run_seed = master.derive(spec.suite, static_cast<std::uint64_t>(r));
      const Split split = ratio_split(b.graph.num_nodes(), spec.train_fraction, run_seed.derive("split"));
      const FeatureMask mask =
          sample_retained(b.graph.num_nodes(), b.features.cols(), spec.keep_fraction, run_seed.derive("mask"));
      auto eval = [&](const std::string& m, const PropagationConfig& prop, double sweep_value) {
        const auto t0 = detail::Clock::now();
        TrainConfig tc = spec.train;
        tc.seed = run_seed.derive("train", detail::method_index(m));
        detail::Evaluation ev;
        if (m == "fp") {
          ev = detail::train_and_evaluate(b.graph, fp(b.features, mask, a_hat, prop.gamma), b.labels, split, tc);
        } else {
          PropagationConfig pc = prop;
          pc.seed = run_seed.derive("mfp");
          ev = detail::train_and_evaluate(b.graph, mfp(b.features, mask, a_hat, pc).matrix, b.labels, split, tc);
        }
        rep.runs.push_back({r, m, name, key, sweep_value, ev.accuracy, ev.macro_f1, detail::seconds_since(t0)});
        if (progress)
          progress(name + " run " + std::to_string(r) + " " + m + " " + key + "=" + detail::fmt(sweep_value) +
                   " acc=" + detail::fmt(ev.accuracy));
      };
      if (key == "homophily") {
        for (const auto& m : methods) eval(m, spec.propagation, ds.value);
        continue;
      }
      std::optional<detail::Evaluation> fp_cached;
      for (double v : values) {
        PropagationConfig prop = spec.propagation;
        if (key == "eta") {
          prop.eta = static_cast<int>(v);
        } else {
          prop.gamma = static_cast<int>(v);
        }
        prop.validate();
        for (const auto& m : methods) {
          // FP does not depend on eta: evaluate once per run, report at every point.
          if (m == "fp" && key == "eta" && fp_cached) {
            rep.runs.push_back({r, m, name, key, v, fp_cached->accuracy, fp_cached->macro_f1, 0.0});
            continue;
          }
          eval(m, prop, v);
          if (m == "fp" && key == "eta") fp_cached = detail::Evaluation{rep.runs.back().accuracy, rep.runs.back().macro_f1};
        }
      }
    }
  }
  rep.aggregates = aggregate(rep.runs);
  return rep;
}

/// Writes a family of synthetic bundles; refuses to overwrite unless `force`.
inline std::vector<FamilyMember> run_generate(const SynthConfig& base, const std::vector<double>& targets,
                                              const std::filesystem::path& out_dir, bool force) {
  namespace fs = std::filesystem;
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    if (!force) throw Error("output.exists", "output path " + out_dir.string() + " exists; pass --force to overwrite");
    fs::remove_all(out_dir);
  }
  return write_family(generate_family(base, targets), targets, base, out_dir);
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string runs_csv(const ExperimentReport& rep) {
  std::string s = "method,dataset,sweep_key,sweep_value,run,metric,value\n";
  for (const auto& r : rep.runs) {
    for (const auto& [metric, value] : {std::pair{"accuracy", r.accuracy}, std::pair{"macro_f1", r.macro_f1}}) {
      s += r.method + "," + r.dataset + "," + r.sweep_key + "," + detail::fmt(r.sweep_value) + "," +
           std::to_string(r.run) + "," + metric + "," + detail::fmt(value) + "\n";
    }
  }
  return s;
}

inline std::string aggregates_csv(const ExperimentReport& rep) {
  std::string s = "method,dataset,sweep_key,sweep_value,metric,mean,std,runs\n";
  for (const auto& a : rep.aggregates)
    s += a.method + "," + a.dataset + "," + a.sweep_key + "," + detail::fmt(a.sweep_value) + "," + a.metric + "," +
         detail::fmt(a.mean) + "," + detail::fmt(a.std) + "," + std::to_string(a.runs) + "\n";
  return s;
}

inline nlohmann::ordered_json to_json(const ExperimentReport& rep) {
  nlohmann::ordered_json j;
  j["suite"] = rep.suite;
  j["config"] = rep.config;
  j["metadata"] = rep.metadata;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : rep.runs)
    j["runs"].push_back({{"run", r.run},
                         {"method", r.method},
                         {"dataset", r.dataset},
                         {"sweep_key", r.sweep_key},
                         {"sweep_value", r.sweep_value},
                         {"accuracy", r.accuracy},
                         {"macro_f1", r.macro_f1},
                         {"wall_seconds", r.wall_seconds}});
  j["aggregates"] = nlohmann::json::array();
  for (const auto& a : rep.aggregates)
    j["aggregates"].push_back({{"method", a.method},
                               {"dataset", a.dataset},
                               {"sweep_key", a.sweep_key},
                               {"sweep_value", a.sweep_value},
                               {"metric", a.metric},
                               {"mean", a.mean},
                               {"std", a.std},
                               {"runs", a.runs}});
  return j;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Per (dataset, method): medians of min-RMSE and max-|PCC| pooled over runs,
/// and the fraction of columns with max-|PCC| <= 0.1.
inline nlohmann::ordered_json exposure_summary(const PrivacyReport& rep) {
  std::map<std::pair<std::string, std::string>, std::pair<std::vector<double>, std::vector<double>>> pooled;
  for (const auto& e : rep.exposures)
    for (const auto& row : e.report.rows) {
      auto& [rmse, pcc] = pooled[{e.report.dataset, e.report.method}];
      rmse.push_back(row.min_rmse);
      pcc.push_back(row.max_abs_pcc);
    }
  nlohmann::ordered_json j = nlohmann::json::array();
  for (const auto& [key, vals] : pooled) {
    const auto& pcc = vals.second;
    const double low = static_cast<double>(std::count_if(pcc.begin(), pcc.end(), [](double v) { return v <= 0.1; })) /
                       static_cast<double>(std::max<std::size_t>(pcc.size(), 1));
    j.push_back({{"dataset", key.first},
                 {"method", key.second},
                 {"median_min_rmse", median(vals.first)},
                 {"median_max_abs_pcc", median(pcc)},
                 {"fraction_pcc_le_0.1", low}});
  }
  return j;
}

inline void write_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write_file(dir / (rep.suite + ".csv"), runs_csv(rep));
  csv::write_file(dir / (rep.suite + "_aggregate.csv"), aggregates_csv(rep));
  csv::write_file(dir / "results.json", to_json(rep).dump(2) + "\n");
}

inline void write_report(const PrivacyReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  csv::write_file(dir / "privacy.csv", runs_csv(rep.experiment));
  csv::write_file(dir / "privacy_aggregate.csv", aggregates_csv(rep.experiment));
  std::string ex = "dataset,run,method,column,retained,min_rmse,max_abs_pcc\n";
  for (const auto& e : rep.exposures)
    for (const auto& row : e.report.rows)
      ex += e.report.dataset + "," + std::to_string(e.run) + "," + e.report.method + "," + std::to_string(row.column) +
            "," + std::to_string(row.retained) + "," + detail::fmt(row.min_rmse) + "," + detail::fmt(row.max_abs_pcc) +
            "\n";
  csv::write_file(dir / "privacy_exposure.csv", ex);
  static const char* rep_names[2] = {"X", "X_hat"};
  std::string cr = "dataset,run,train_rep,test_rep,macro_f1\n";
  nlohmann::ordered_json crj = nlohmann::json::array();
  for (const auto& c : rep.cross_representation)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        cr += c.dataset + "," + std::to_string(c.run) + "," + rep_names[a] + "," + rep_names[b] + "," +
              detail::fmt(c.report.f1[a][b]) + "\n";
        crj.push_back({{"dataset", c.dataset}, {"run", c.run}, {"train_rep", rep_names[a]},
                       {"test_rep", rep_names[b]}, {"macro_f1", c.report.f1[a][b]},
                       {"model_seed", a == 0 ? c.report.seed_x : c.report.seed_xhat}});
      }
  csv::write_file(dir / "privacy_crossrep.csv", cr);
  auto j = to_json(rep.experiment);
  j["exposure_summary"] = exposure_summary(rep);
  j["cross_representation"] = crj;
  csv::write_file(dir / "results.json", j.dump(2) + "\n");
}

}  // namespace mfplab
