#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "aml/dataset.hpp"

namespace aml {

struct RegressionAdjustment;  // nuisance.hpp

// One gauge group of the balance problem: weighted averages of the columns
// of G should match the targets t. The worst-case discrepancy over the
// whole problem combines the per-block column maxima in Euclidean norm.
struct BalanceBlock {
  std::string label;
  Eigen::MatrixXd G;  // n x p_b
  Eigen::VectorXd t;  // p_b
};

struct BalanceProblem {
  std::vector<BalanceBlock> blocks;
  Eigen::Index n = 0;

  Eigen::Index total_cols() const {
    Eigen::Index p = 0;
    for (const auto& b : blocks) p += b.G.cols();
    return p;
  }
};

enum class EstimandKind { MarMean, ApeConditionallyLinear, DistributionShift };

struct EstimandSpec {
  EstimandKind kind = EstimandKind::ApeConditionallyLinear;
  // DistributionShift only: the known functional applied to each dictionary
  // column, in enumeration order.
  Eigen::VectorXd shift_targets;
};

// Mean of an outcome observed only where W = 1: one block with the
// treated-row design W_i * Phi_ij and full-sample column means as targets.
BalanceProblem build_mar(const Dataset& ds,
                         const Eigen::Ref<const Eigen::MatrixXd>& Phi);

// Average partial effect under the conditionally linear model
// m(x, w) = mu(x) + w tau(x): a "mu" block (design Phi, zero targets) and a
// "tau" block (design W_i * Phi_ij, column-mean targets).
BalanceProblem build_ape_clm(const Dataset& ds,
                             const Eigen::Ref<const Eigen::MatrixXd>& Phi);

// Known linear functional of the regression function (e.g. a distribution
// shift): one block with design Phi and caller-supplied exact targets.
BalanceProblem build_dist_shift(const Dataset& ds,
                                const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                                const EstimandSpec& spec);

// Widens the balance class with data-adaptive partition features Psi as one
// extra block; each column carries the target its role dictates (plain
// columns balance to zero, W-weighted columns to the column means).
void append_extended_block(BalanceProblem& bp, const Dataset& ds,
                           const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                           EstimandKind kind);

struct ImbalanceReport {
  double total = 0.0;                // sqrt of sum of squared block maxima
  std::vector<double> per_block;     // max_j |t_j - (G' gamma)_j / n| per block
};

ImbalanceReport imbalance(const BalanceProblem& bp,
                          const Eigen::Ref<const Eigen::VectorXd>& gamma);

// Plug-in functional value of the fitted regression: mean of m_hat(X_i, 1)
// for the missing-at-random mean, mean of tau_hat(X_i) for the average
// partial effect, and targets' inner product with the outcome coefficients
// for a distribution shift.
double plugin_value(const EstimandSpec& spec, const RegressionAdjustment& fit,
                    const Eigen::Ref<const Eigen::MatrixXd>& Phi);

// Convenience bundle tying a compiled problem to the basis that produced it.
struct CompiledEstimand {
  EstimandSpec spec;
  Eigen::MatrixXd Phi;
  BalanceProblem problem;
};

CompiledEstimand compile_estimand(const Dataset& ds,
                                  const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                                  const EstimandSpec& spec);

}  // namespace aml
