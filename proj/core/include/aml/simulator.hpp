#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aml/basis.hpp"
#include "aml/dataset.hpp"
#include "aml/solver.hpp"

namespace aml {

// One cell of the simulation study: X ~ N(0, I_d), W | X from a
// setup-specific family whose mean depends on the first k covariates, and
// Y = mu(X) + W tau(X) + N(0, 1).
struct SetupConfig {
  int setup_id = 1;  // 1: Beta, 2: scaled Gaussian, 3: Poisson, 4: log-normal
  Eigen::Index n = 600;
  int d = 6;
  int k = 3;
  std::uint64_t seed = 1;
};

// True conditional moments and signal functions at the drawn covariates.
struct OracleAnnotations {
  Eigen::VectorXd e;    // E[W|X]
  Eigen::VectorXd v;    // Var(W|X)
  Eigen::VectorXd tau;
  Eigen::VectorXd mu;
};

// Signal functions of one setup evaluated at a covariate row.
struct SetupSignal {
  double mu = 0.0;
  double tau = 0.0;
  double e = 0.0;
  double v = 0.0;
};

SetupSignal setup_signal(int setup_id, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                         int d, int k);

// Conditional mean and variance of W at a covariate row.
std::pair<double, double> oracle_moments(int setup_id,
                                         const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                         int d, int k);

// Population estimand E[tau(X)]; closed form per setup.
double true_psi(int setup_id, int d, int k);

// Draws one replication. The stream is derived from (seed, setup, rep), so
// any replication can be regenerated independently of the others.
std::pair<Dataset, OracleAnnotations> draw_dataset(const SetupConfig& cfg, int rep);

enum class Method { Mlin, Aml, AmlPlus, DrPlugin, DrOracle, PluginRiesz };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

struct SummaryRow {
  std::string method;
  int setup = 0;
  Eigen::Index n = 0;
  int d = 0;
  int k = 0;
  int reps = 0;
  double rmse = 0.0;
  double bias = 0.0;
  double coverage = 0.0;  // NaN for methods without confidence intervals
  double mean_se = 0.0;   // NaN likewise
  int failures = 0;
};

struct SimOptions {
  int basis_max_order = 3;
  ExtendedFeatureSpec extended;  // widths/depth for the widened balance class
  SolverConfig solver;
  int folds = 10;
  double alpha = 0.05;
};

// Runs `reps` independent replications of the requested methods and
// aggregates RMSE, bias, coverage against the population estimand, and mean
// standard error. Replication r is a pure function of (cfg, r); worker
// threads only race for work items, so the summary is identical for any
// thread count. Failed replications are counted and excluded.
std::vector<SummaryRow> run_replications(const SetupConfig& cfg,
                                         const std::vector<Method>& methods,
                                         int reps, int threads,
                                         const SimOptions& opt = {});

}  // namespace aml
