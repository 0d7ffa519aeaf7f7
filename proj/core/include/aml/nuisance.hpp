#pragma once

#include <Eigen/Dense>
#include <functional>

#include "aml/dataset.hpp"

namespace aml {

// Lasso solution: (2n)^-1 sum (y_i - b0 - x_i'beta)^2 + lambda ||beta||_1,
// intercept unpenalized.
struct LassoFit {
  double intercept = 0.0;
  Eigen::VectorXd coef;
  double lambda = 0.0;
  double objective = 0.0;
  bool converged = true;
};

// Cyclic coordinate descent with covariance updates; stops when the largest
// coordinate move in a sweep is at most tol and the KKT residuals are
// within 10*tol.
LassoFit lasso_cd(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                  double tol = 1e-8, int max_iter = 100000);

// K-fold cross-validation over a geometric path of n_lambda values spanning
// three decades below lambda_max, refit on the full data at the selected
// value. A zero-variance outcome short-circuits to the intercept-only fit.
LassoFit lasso_cv(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y,
                  const FoldAssignment& folds, int n_lambda = 50);

// Fits on each fold's complement (fold labels compacted for any inner
// cross-validation), predicts on the fold: out-of-fold predictions that
// never see their own row.
using Fitter = std::function<LassoFit(const Eigen::MatrixXd&, const Eigen::VectorXd&,
                                      const FoldAssignment&)>;
Eigen::VectorXd crossfit_oof(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             const FoldAssignment& folds, const Fitter& fitter);

// Residual-on-residual lasso for the treatment effect function: minimizes
// (2n)^-1 sum [(Y_i - m_i) - (W_i - e_i) phi(X_i)'beta]^2 + lambda||beta||_1
// with the treatment residual absorbed into the design (no free intercept;
// the constant basis column plays that role and is penalized like the rest).
// lambda is chosen by K-fold cross-validation on the same objective.
// Returns coefficients indexed on the columns of Phi.
Eigen::VectorXd r_learner_tau(const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                              const Eigen::Ref<const Eigen::VectorXd>& W,
                              const Eigen::Ref<const Eigen::VectorXd>& Y,
                              const Eigen::Ref<const Eigen::VectorXd>& m_oof,
                              const Eigen::Ref<const Eigen::VectorXd>& e_oof,
                              const FoldAssignment& folds);

// Full regression adjustment. Coefficient vectors are indexed on the
// columns of the basis matrix Phi whose first column must be the constant
// term (separately fitted intercepts are folded into it). The baseline
// mu_hat(x) = yhat(x) - tau_hat(x) e_hat(x) is a product of expansions and
// is evaluated pointwise rather than stored as coefficients.
struct RegressionAdjustment {
  Eigen::VectorXd y_coef;    // E[Y|X]
  Eigen::VectorXd e_coef;    // E[W|X]
  Eigen::VectorXd tau_coef;  // treatment effect
  Eigen::VectorXd v_coef;    // Var(W|X)
  Eigen::VectorXd m_oof;     // out-of-fold E[Y|X] predictions
  Eigen::VectorXd e_oof;     // out-of-fold E[W|X] predictions
  FoldAssignment folds;
  double v_floor = 0.01;     // evaluations of v_hat are clamped from below

  Eigen::VectorXd y_values(const Eigen::Ref<const Eigen::MatrixXd>& Phi) const;
  Eigen::VectorXd e_values(const Eigen::Ref<const Eigen::MatrixXd>& Phi) const;
  Eigen::VectorXd tau_values(const Eigen::Ref<const Eigen::MatrixXd>& Phi) const;
  Eigen::VectorXd v_values(const Eigen::Ref<const Eigen::MatrixXd>& Phi) const;
  Eigen::VectorXd mu_values(const Eigen::Ref<const Eigen::MatrixXd>& Phi) const;
  // m_hat(x, w) = mu_hat(x) + w tau_hat(x) at per-row treatment values.
  Eigen::VectorXd m_values(const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                           const Eigen::Ref<const Eigen::VectorXd>& W) const;
};

// Appendix-style recipe: cross-validated lasso fits for E[Y|X] and E[W|X]
// (full-data coefficients plus out-of-fold predictions), residual-on-residual
// lasso for tau, a separate lasso of (W - e_oof)^2 for the conditional
// variance, and the pointwise mu_hat reconstruction. The variance floor is
// max(0.01, 1e-3 Var(W)).
RegressionAdjustment fit_regression_adjustment(
    const Dataset& ds, const Eigen::Ref<const Eigen::MatrixXd>& Phi,
    const FoldAssignment& folds);

}  // namespace aml
