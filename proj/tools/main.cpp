#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aml/dataset.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

std::vector<std::string> split_methods(const std::string& csv) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : csv) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (const std::string& name : out)
    if (name.empty())
      throw std::invalid_argument("--methods contains an empty method name");
  return out;
}

// Default worker count; the --threads flag wins over the environment.
int env_threads() {
  const char* env = std::getenv("AML_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  int v = 0;
  const std::string s(env);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 1)
    throw std::invalid_argument("AML_THREADS must be a positive integer");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  using aml::cli::EstimateArgs;
  using aml::cli::SimulateArgs;
  using aml::cli::WeightsArgs;

  CLI::App app{"Minimax balancing weights with regression adjustment"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "Run the Monte Carlo study and summarize estimator performance");
  int sim_setup = 1;
  long long sim_n = 600;
  int sim_d = 6, sim_k = 3, sim_reps = 0, sim_threads = 1;
  std::uint64_t sim_seed = 1;
  std::string sim_methods, sim_out, sim_config;
  sim->add_option("--setup", sim_setup, "Data-generating setup, 1..4");
  sim->add_option("--n", sim_n, "Sample size per replication");
  sim->add_option("--d", sim_d, "Covariate dimension");
  sim->add_option("--k", sim_k, "Signal dimension");
  sim->add_option("--reps", sim_reps, "Number of replications")->required();
  auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "Base RNG seed");
  sim->add_option("--methods", sim_methods,
                  "Comma-separated subset of mlin,aml,aml+,dr,dr-oracle,plugin-riesz")
      ->required();
  auto* sim_threads_opt =
      sim->add_option("--threads", sim_threads, "Worker threads (default AML_THREADS or 1)");
  sim->add_option("--out", sim_out, "Summary CSV path; config sidecar at <out>.json")
      ->required();
  sim->add_option("--config", sim_config, "JSON config file");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate a functional from a CSV sample");
  std::string est_data, est_estimand, est_targets, est_method = "aml";
  std::string est_out, est_config;
  bool est_standardize = false;
  std::uint64_t est_seed = 1;
  int est_folds = 10;
  double est_alpha = 0.05, est_sigma = 1.0;
  est->add_option("--data", est_data, "Input CSV with columns y,w,x1..xd")->required();
  est->add_option("--estimand", est_estimand, "mar-mean | ape-clm | shift")
      ->required()
      ->check(CLI::IsMember({"mar-mean", "ape-clm", "shift"}));
  est->add_option("--shift-targets", est_targets,
                  "File of per-column functional targets (shift only)");
  est->add_option("--method", est_method, "aml | mlin | dr | plugin-riesz")
      ->check(CLI::IsMember({"aml", "mlin", "dr", "plugin-riesz"}));
  est->add_flag("--standardize", est_standardize,
                "Center and scale covariates before the basis");
  est->add_option("--out", est_out, "Report JSON path")->required();
  est->add_option("--config", est_config, "JSON config file");
  auto* est_seed_opt = est->add_option("--seed", est_seed, "Fold-assignment seed");
  auto* est_folds_opt = est->add_option("--folds", est_folds, "Cross-fitting folds");
  auto* est_alpha_opt = est->add_option("--alpha", est_alpha, "Two-sided CI level");
  auto* est_sigma_opt = est->add_option("--sigma", est_sigma, "Noise scale of the solver");

  // weights
  auto* wts = app.add_subcommand(
      "weights", "Solve the balancing weights for a CSV sample and dump them");
  std::string wts_data, wts_estimand, wts_targets, wts_out, wts_config;
  bool wts_standardize = false;
  std::uint64_t wts_seed = 1;
  int wts_folds = 10;
  double wts_sigma = 1.0;
  wts->add_option("--data", wts_data, "Input CSV with columns y,w,x1..xd")->required();
  wts->add_option("--estimand", wts_estimand, "mar-mean | ape-clm | shift")
      ->required()
      ->check(CLI::IsMember({"mar-mean", "ape-clm", "shift"}));
  wts->add_option("--shift-targets", wts_targets,
                  "File of per-column functional targets (shift only)");
  wts->add_flag("--standardize", wts_standardize,
                "Center and scale covariates before the basis");
  wts->add_option("--out", wts_out, "Weights CSV path; diagnostics at <out>.json")
      ->required();
  wts->add_option("--config", wts_config, "JSON config file");
  auto* wts_seed_opt = wts->add_option("--seed", wts_seed, "Fold-assignment seed");
  auto* wts_folds_opt = wts->add_option("--folds", wts_folds, "Cross-fitting folds");
  auto* wts_sigma_opt = wts->add_option("--sigma", wts_sigma, "Noise scale of the solver");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim)) {
      SimulateArgs a;
      a.config = aml::cli::load_run_config(sim_config);
      if (sim_seed_opt->count() > 0) a.config.seed = sim_seed;
      a.setup = sim_setup;
      a.n = sim_n;
      a.d = sim_d;
      a.k = sim_k;
      a.reps = sim_reps;
      a.threads = sim_threads_opt->count() > 0 ? sim_threads : env_threads();
      a.methods = split_methods(sim_methods);
      a.out = sim_out;
      cmd_simulate(a);
    } else if (app.got_subcommand(est)) {
      EstimateArgs a;
      a.config = aml::cli::load_run_config(est_config);
      if (est_seed_opt->count() > 0) a.config.seed = est_seed;
      if (est_folds_opt->count() > 0) a.config.folds = est_folds;
      if (est_alpha_opt->count() > 0) a.config.alpha = est_alpha;
      if (est_sigma_opt->count() > 0) a.config.solver.sigma = est_sigma;
      if (est_standardize) a.config.standardize = true;
      a.data = est_data;
      a.estimand = est_estimand;
      a.shift_targets = est_targets;
      a.method = est_method;
      a.out = est_out;
      cmd_estimate(a);
    } else if (app.got_subcommand(wts)) {
      WeightsArgs a;
      a.config = aml::cli::load_run_config(wts_config);
      if (wts_seed_opt->count() > 0) a.config.seed = wts_seed;
      if (wts_folds_opt->count() > 0) a.config.folds = wts_folds;
      if (wts_sigma_opt->count() > 0) a.config.solver.sigma = wts_sigma;
      if (wts_standardize) a.config.standardize = true;
      a.data = wts_data;
      a.estimand = wts_estimand;
      a.shift_targets = wts_targets;
      a.out = wts_out;
      cmd_weights(a);
    }
    return 0;
  } catch (const aml::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
