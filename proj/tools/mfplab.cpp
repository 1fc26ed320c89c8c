// mfplab command-line driver: synthetic data generation and experiment suites.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfplab/experiment.hpp"

namespace {

using mfplab::ExperimentSpec;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_list(s)) {
    double v = 0.0;
    if (!mfplab::csv::parse_number(tok, v)) throw mfplab::InvalidArgument("not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

// Flags that are left unset keep the config-file (or default) value.
struct Overrides {
  std::vector<std::string> datasets;
  std::optional<std::string> methods;
  std::optional<int> runs, eta, gamma, epochs;
  std::optional<mfplab::Index> hidden;
  std::optional<double> p, keep_fraction, noise_mean, noise_var, lr;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, config, values;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--dataset", o.datasets, "graph bundle directory (repeatable)");
  cmd->add_option("--methods", o.methods, "comma list of mfp,fp,rfp,lp,pe,gcn-full");
  cmd->add_option("--runs", o.runs, "number of runs");
  cmd->add_option("--eta", o.eta, "number of MFP views");
  cmd->add_option("--gamma", o.gamma, "propagation steps");
  cmd->add_option("--p", o.p, "view sampling ratio");
  cmd->add_option("--keep-fraction", o.keep_fraction, "fraction of retained entries (default 0.01)");
  cmd->add_option("--noise-mean", o.noise_mean, "noise mean");
  cmd->add_option("--noise-var", o.noise_var, "noise variance");
  cmd->add_option("--hidden", o.hidden, "GCN hidden width");
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--config", o.config, "JSON config; flags override it");
}

ExperimentSpec resolve(const std::string& suite, const Overrides& o) {
  ExperimentSpec s;
  s.suite = suite;
  if (suite == "privacy" || suite.starts_with("sensitivity")) s.runs = 30;
  if (o.config) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(mfplab::csv::read_file(*o.config));
    } catch (const nlohmann::json::exception& e) {
      throw mfplab::Error("config", std::string("cannot parse config: ") + e.what());
    }
    // A results.json echoes its config under "config".
    if (j.contains("config") && j["config"].is_object()) j = j["config"];
    if (j.contains("suite") && j["suite"] != suite)
      throw mfplab::Error("config", "config is for suite '" + j["suite"].get<std::string>() + "', not '" + suite + "'");
    mfplab::apply_json(s, j);
  }
  if (!o.datasets.empty()) s.datasets.assign(o.datasets.begin(), o.datasets.end());
  if (o.methods) s.methods = split_list(*o.methods);
  if (o.runs) s.runs = *o.runs;
  if (o.eta) s.propagation.eta = *o.eta;
  if (o.gamma) s.propagation.gamma = *o.gamma;
  if (o.p) s.propagation.p = *o.p;
  if (o.keep_fraction) s.keep_fraction = *o.keep_fraction;
  if (o.noise_mean) s.propagation.noise.mean = *o.noise_mean;
  if (o.noise_var) s.propagation.noise.variance = *o.noise_var;
  if (o.hidden) s.train.hidden_dim = *o.hidden;
  if (o.epochs) s.train.epochs = *o.epochs;
  if (o.lr) s.train.learning_rate = *o.lr;
  if (o.seed) s.master_seed = *o.seed;
  if (o.out) s.out_dir = *o.out;
  if (o.values) s.sweep_values = parse_doubles(*o.values);
  return s;
}

void guard_output(const std::filesystem::path& dir, bool force) {
  if (!force && std::filesystem::exists(dir / "results.json"))
    throw mfplab::Error("output.exists", "output path " + dir.string() + " already holds results; pass --force");
}

void progress(const std::string& line) { std::cerr << line << '\n'; }

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mfplab: multi-view feature propagation experiments"};
  app.require_subcommand(1);
  bool force = false;
  bool quiet = false;
  app.add_flag("--force", force, "overwrite existing outputs");
  app.add_flag("-q,--quiet", quiet, "suppress progress lines");

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic homophily family");
  std::string gen_out = "data/synth";
  std::string targets = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  mfplab::SynthConfig synth;
  std::uint64_t gen_seed = 0;
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--targets", targets, "comma list of homophily targets");
  gen->add_option("--nodes", synth.num_nodes, "nodes per graph");
  gen->add_option("--classes", synth.num_classes, "number of classes");
  gen->add_option("--edges-per-node", synth.edges_per_node, "attachment edges per node");
  gen->add_option("--feature-spread", synth.feature_spread, "radius of class means");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_flag("--force", force, "overwrite existing output");

  Overrides perf_o, priv_o, sens_o;
  auto* perf = app.add_subcommand("performance", "node classification accuracy (Planetoid split)");
  add_common(perf, perf_o);
  perf->add_flag("--force", force, "overwrite existing output");
  auto* priv = app.add_subcommand("privacy", "feature exposure and cross-representation audit");
  add_common(priv, priv_o);
  priv->add_flag("--force", force, "overwrite existing output");
  auto* sens = app.add_subcommand("sensitivity", "sweep eta, gamma or homophily");
  add_common(sens, sens_o);
  sens->add_flag("--force", force, "overwrite existing output");
  std::string sweep;
  sens->add_option("--sweep", sweep, "eta | gamma | homophily")->required();
  sens->add_option("--values", sens_o.values, "comma list of sweep values (default: suite grid)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error cli.parse: " << one_line(e.what()) << '\n';
    return 2;
  }

  const mfplab::ProgressFn report = quiet ? mfplab::ProgressFn{} : mfplab::ProgressFn{progress};
  try {
    if (gen->parsed()) {
      synth.seed = mfplab::SeedStream(gen_seed);
      const auto members = mfplab::run_generate(synth, parse_doubles(targets), gen_out, force);
      for (const auto& m : members)
        std::printf("%s target=%.2f measured=%.4f\n", m.path.string().c_str(), m.target, m.measured);
    } else if (perf->parsed()) {
      const auto spec = resolve("performance", perf_o);
      guard_output(spec.out_dir, force);
      const auto rep = mfplab::run_performance(spec, report);
      mfplab::write_report(rep, spec.out_dir);
      std::cout << mfplab::aggregates_csv(rep);
    } else if (priv->parsed()) {
      const auto spec = resolve("privacy", priv_o);
      guard_output(spec.out_dir, force);
      const auto rep = mfplab::run_privacy(spec, report);
      mfplab::write_report(rep, spec.out_dir);
      std::cout << mfplab::aggregates_csv(rep.experiment);
      std::cout << mfplab::exposure_summary(rep).dump(2) << '\n';
    } else if (sens->parsed()) {
      if (sweep != "eta" && sweep != "gamma" && sweep != "homophily")
        throw mfplab::Error("spec.sweep", "unknown sweep key '" + sweep + "'");
      const auto spec = resolve("sensitivity-" + sweep, sens_o);
      guard_output(spec.out_dir, force);
      const auto rep = mfplab::run_sensitivity(spec, report);
      mfplab::write_report(rep, spec.out_dir);
      std::cout << mfplab::aggregates_csv(rep);
    }
  } catch (const mfplab::Error& e) {
    std::cerr << "error " << e.code() << ": " << one_line(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error internal: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
