#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "aml/estimand.hpp"
#include "aml/nuisance.hpp"
#include "aml/solver.hpp"

namespace aml {

struct Diagnostics {
  double imbalance = 0.0;
  std::optional<double> duality_gap;  // solver-based methods only
  double weight_l2 = 0.0;             // ||gamma||^2 / n^2
  double plugin_term = 0.0;
  double correction_term = 0.0;
  bool e_floored = false;  // inverse-propensity floor was hit
  bool v_floored = false;  // variance floor was hit
};

struct EstimateReport {
  double psi_hat = 0.0;
  std::optional<double> se;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::string method;
  Diagnostics diagnostics;
};

// V = n^-1 sum [(h_i - psi)^2 + gamma_i^2 r_i^2]; the standard error of the
// estimate is sqrt(V/n).
double variance_estimate(const Eigen::Ref<const Eigen::VectorXd>& h_vals,
                         double psi_hat,
                         const Eigen::Ref<const Eigen::VectorXd>& gamma,
                         const Eigen::Ref<const Eigen::VectorXd>& residuals);

// Two-sided normal critical value; pinned to 1.959964 at alpha = 0.05.
double normal_quantile_two_sided(double alpha);

// Augmented estimate: plug-in value of the fitted regression minus the
// gamma-weighted average of its residuals, with a plug-in variance CI.
EstimateReport aml_estimate(const Dataset& ds, const RegressionAdjustment& fit,
                            const WeightsSolution& ws, const CompiledEstimand& ce,
                            double alpha = 0.05, const std::string& label = "aml");

// Pure weighting estimate n^-1 sum gamma_i Y_i; no standard error.
EstimateReport mlin_estimate(const Dataset& ds, const WeightsSolution& ws,
                             const CompiledEstimand& ce);

// Doubly robust baseline with plug-in Riesz weights: (W - e_hat)/v_hat for
// the average partial effect, W/e_hat (e_hat floored at 0.01) for the
// missing-at-random mean.
EstimateReport dr_plugin_estimate(const Dataset& ds, const RegressionAdjustment& fit,
                                  const CompiledEstimand& ce, double alpha = 0.05);

// Same form with true conditional moments supplied by a simulator.
EstimateReport dr_oracle_estimate(const Dataset& ds, const RegressionAdjustment& fit,
                                  const Eigen::Ref<const Eigen::VectorXd>& oracle_e,
                                  const Eigen::Ref<const Eigen::VectorXd>& oracle_v,
                                  const CompiledEstimand& ce, double alpha = 0.05);

// Weighting by the plug-in Riesz representer alone: n^-1 sum g_hat(Z_i) Y_i;
// no standard error.
EstimateReport plugin_weight_estimate(const Dataset& ds,
                                      const RegressionAdjustment& fit,
                                      const CompiledEstimand& ce);

}  // namespace aml
