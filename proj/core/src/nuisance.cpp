#include "aml/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace aml {

namespace {

// Covariance form of the least-squares part (2n)^-1 ||y - X beta||^2:
// gram = X'X/n, corr = X'y/n, yty = y'y/n, all on centered data when the
// intercept is free. Sweeps then cost O(p) per visited coordinate.
struct QuadForm {
  Eigen::MatrixXd gram;
  Eigen::VectorXd corr;
  double yty = 0.0;
  Eigen::VectorXd x_mean;
  double y_mean = 0.0;
  bool centered = false;
  Eigen::Index n = 0;
};

QuadForm make_quad(const Eigen::Ref<const Eigen::MatrixXd>& X,
                   const Eigen::Ref<const Eigen::VectorXd>& y, bool center) {
  if (X.rows() != y.size())
    throw std::invalid_argument("design and outcome lengths differ");
  if (X.rows() < 1) throw std::invalid_argument("empty design");
  if (!X.allFinite() || !y.allFinite())
    throw std::invalid_argument("regression inputs have non-finite entries");
  QuadForm q;
  q.n = X.rows();
  q.centered = center;
  const double n = static_cast<double>(q.n);
  if (center) {
    q.x_mean = X.colwise().mean();
    q.y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - q.x_mean.transpose();
    const Eigen::VectorXd yc = y.array() - q.y_mean;
    q.gram.noalias() = Xc.transpose() * Xc / n;
    q.corr.noalias() = Xc.transpose() * yc / n;
    q.yty = yc.squaredNorm() / n;
  } else {
    q.x_mean = Eigen::VectorXd::Zero(X.cols());
    q.gram.noalias() = X.transpose() * X / n;
    q.corr.noalias() = X.transpose() * y / n;
    q.yty = y.squaredNorm() / n;
  }
  return q;
}

double soft(double z, double lambda) {
  const double mag = std::abs(z) - lambda;
  return mag > 0.0 ? (z > 0.0 ? mag : -mag) : 0.0;
}

// Cyclic exact coordinate descent with warm start. Declares convergence only
// after the sweep movement drops to tol and the KKT residuals sit inside
// half the documented 10*tol envelope.
bool cd_solve(const QuadForm& q, double lambda, double tol, int max_iter,
              Eigen::VectorXd& beta) {
  const Eigen::Index p = q.gram.rows();
  Eigen::VectorXd gb = q.gram * beta;
  for (int sweep = 0; sweep < max_iter; ++sweep) {
    double max_move = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double qjj = q.gram(j, j);
      if (qjj <= 0.0) continue;  // constant column; the intercept owns it
      const double z = q.corr[j] - gb[j] + qjj * beta[j];
      const double bn = soft(z, lambda) / qjj;
      if (bn != beta[j]) {
        gb += (bn - beta[j]) * q.gram.col(j);
        max_move = std::max(max_move, std::abs(bn - beta[j]));
        beta[j] = bn;
      }
    }
    if (max_move <= tol) {
      bool kkt_ok = true;
      for (Eigen::Index j = 0; j < p && kkt_ok; ++j) {
        const double grad = gb[j] - q.corr[j];
        if (beta[j] != 0.0)
          kkt_ok = std::abs(grad + lambda * (beta[j] > 0.0 ? 1.0 : -1.0)) <= 5.0 * tol;
        else
          kkt_ok = std::abs(grad) <= lambda + 5.0 * tol;
      }
      if (kkt_ok) return true;
    }
  }
  return false;
}

double quad_objective(const QuadForm& q, const Eigen::VectorXd& beta,
                      double lambda) {
  const double fit =
      0.5 * (q.yty - 2.0 * beta.dot(q.corr) + beta.dot(q.gram * beta));
  return fit + lambda * beta.cwiseAbs().sum();
}

LassoFit finish(const QuadForm& q, const Eigen::VectorXd& beta, double lambda,
                bool converged) {
  LassoFit f;
  f.coef = beta;
  f.lambda = lambda;
  f.converged = converged;
  f.intercept = q.centered ? q.y_mean - q.x_mean.dot(beta) : 0.0;
  f.objective = quad_objective(q, beta, lambda);
  return f;
}

LassoFit intercept_only(const QuadForm& q) {
  return finish(q, Eigen::VectorXd::Zero(q.gram.rows()), 0.0, true);
}

std::vector<double> lambda_grid(double lmax, int n_lambda) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n_lambda));
  if (n_lambda == 1) {
    grid.push_back(lmax);
    return grid;
  }
  const double ratio = std::pow(1e-3, 1.0 / (n_lambda - 1));
  double lam = lmax;
  for (int i = 0; i < n_lambda; ++i) {
    grid.push_back(lam);
    lam *= ratio;
  }
  return grid;
}

std::vector<Eigen::Index> complement_rows(const FoldAssignment& folds, int k) {
  std::vector<Eigen::Index> rows;
  rows.reserve(static_cast<std::size_t>(folds.n()));
  for (Eigen::Index i = 0; i < folds.n(); ++i)
    if (folds.fold_of[static_cast<std::size_t>(i)] != k) rows.push_back(i);
  return rows;
}

FoldAssignment compact_without(const FoldAssignment& folds, int k,
                               const std::vector<Eigen::Index>& rows) {
  FoldAssignment inner;
  inner.K = folds.K - 1;
  inner.fold_of.reserve(rows.size());
  for (Eigen::Index i : rows) {
    const int l = folds.fold_of[static_cast<std::size_t>(i)];
    inner.fold_of.push_back(l < k ? l : l - 1);
  }
  return inner;
}

constexpr double kCdTol = 1e-8;
constexpr int kCdMaxIter = 100000;

// Shared cross-validated lasso; centering off gives the no-intercept variant
// used by the residual-on-residual fit.
LassoFit cv_lasso(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y,
                  const FoldAssignment& folds, int n_lambda, bool center) {
  if (folds.n() != X.rows())
    throw std::invalid_argument("fold assignment does not match the sample");
  if (folds.K < 2) throw std::invalid_argument("cross-validation needs K >= 2");
  if (n_lambda < 1) throw std::invalid_argument("empty penalty path");

  const QuadForm q = make_quad(X, y, center);
  const double spread = 1.0 + std::abs(q.y_mean);
  if (center && q.yty <= 1e-24 * spread * spread) return intercept_only(q);
  const double lmax = q.corr.size() > 0 ? q.corr.cwiseAbs().maxCoeff() : 0.0;
  if (lmax <= 0.0) return intercept_only(q);

  const std::vector<double> grid = lambda_grid(lmax, n_lambda);
  std::vector<double> cv_err(grid.size(), 0.0);
  const auto fold_idx = folds.fold_indices();
  for (int k = 0; k < folds.K; ++k) {
    const std::vector<Eigen::Index> train = complement_rows(folds, k);
    const Eigen::MatrixXd Xtr = X(train, Eigen::all);
    const Eigen::VectorXd ytr = y(train);
    const Eigen::MatrixXd Xte = X(fold_idx[static_cast<std::size_t>(k)], Eigen::all);
    const Eigen::VectorXd yte = y(fold_idx[static_cast<std::size_t>(k)]);
    const QuadForm qtr = make_quad(Xtr, ytr, center);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      cd_solve(qtr, grid[i], kCdTol, kCdMaxIter, beta);
      const double b0 = center ? qtr.y_mean - qtr.x_mean.dot(beta) : 0.0;
      cv_err[i] += (yte.array() - (Xte * beta).array() - b0).square().sum();
    }
  }

  std::size_t pick = 0;
  for (std::size_t i = 1; i < cv_err.size(); ++i)
    if (cv_err[i] < cv_err[pick]) pick = i;  // ties keep the larger penalty

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  bool converged = true;
  for (std::size_t i = 0; i <= pick; ++i)
    converged = cd_solve(q, grid[i], kCdTol, kCdMaxIter, beta);
  return finish(q, beta, grid[pick], converged);
}

void check_coef_size(const Eigen::VectorXd& coef,
                     const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                     const char* what) {
  if (coef.size() != Phi.cols())
    throw std::invalid_argument(std::string(what) +
                                " coefficients do not match the basis");
}

}  // namespace

LassoFit lasso_cd(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, double lambda,
                  double tol, int max_iter) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (tol < 0.0) throw std::invalid_argument("tol must be nonnegative");
  const QuadForm q = make_quad(X, y, true);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  const bool converged = cd_solve(q, lambda, tol, max_iter, beta);
  return finish(q, beta, lambda, converged);
}

LassoFit lasso_cv(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y,
                  const FoldAssignment& folds, int n_lambda) {
  return cv_lasso(X, y, folds, n_lambda, true);
}

Eigen::VectorXd crossfit_oof(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             const FoldAssignment& folds, const Fitter& fitter) {
  if (folds.n() != X.rows())
    throw std::invalid_argument("fold assignment does not match the sample");
  if (X.rows() != y.size())
    throw std::invalid_argument("design and outcome lengths differ");
  if (folds.K < 2) throw std::invalid_argument("cross-fitting needs K >= 2");
  Eigen::VectorXd out(X.rows());
  const auto fold_idx = folds.fold_indices();
  for (int k = 0; k < folds.K; ++k) {
    const std::vector<Eigen::Index> train = complement_rows(folds, k);
    const FoldAssignment inner = compact_without(folds, k, train);
    const LassoFit fit = fitter(X(train, Eigen::all), y(train), inner);
    for (Eigen::Index i : fold_idx[static_cast<std::size_t>(k)])
      out[i] = fit.intercept + X.row(i).dot(fit.coef);
  }
  return out;
}

Eigen::VectorXd r_learner_tau(const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                              const Eigen::Ref<const Eigen::VectorXd>& W,
                              const Eigen::Ref<const Eigen::VectorXd>& Y,
                              const Eigen::Ref<const Eigen::VectorXd>& m_oof,
                              const Eigen::Ref<const Eigen::VectorXd>& e_oof,
                              const FoldAssignment& folds) {
  const Eigen::Index n = Phi.rows();
  if (W.size() != n || Y.size() != n || m_oof.size() != n || e_oof.size() != n)
    throw std::invalid_argument("residual inputs do not match the sample");
  const Eigen::VectorXd wres = W - e_oof;
  const double scale = 1.0 + W.cwiseAbs().maxCoeff() + e_oof.cwiseAbs().maxCoeff();
  if (wres.cwiseAbs().maxCoeff() <= 1e-12 * scale)
    return Eigen::VectorXd::Zero(Phi.cols());  // no treatment variation left
  const Eigen::MatrixXd D = Phi.array().colwise() * wres.array();
  const Eigen::VectorXd ytil = Y - m_oof;
  return cv_lasso(D, ytil, folds, 50, false).coef;
}

Eigen::VectorXd RegressionAdjustment::y_values(
    const Eigen::Ref<const Eigen::MatrixXd>& Phi) const {
  check_coef_size(y_coef, Phi, "outcome");
  return Phi * y_coef;
}

Eigen::VectorXd RegressionAdjustment::e_values(
    const Eigen::Ref<const Eigen::MatrixXd>& Phi) const {
  check_coef_size(e_coef, Phi, "treatment");
  return Phi * e_coef;
}

Eigen::VectorXd RegressionAdjustment::tau_values(
    const Eigen::Ref<const Eigen::MatrixXd>& Phi) const {
  check_coef_size(tau_coef, Phi, "effect");
  return Phi * tau_coef;
}

Eigen::VectorXd RegressionAdjustment::v_values(
    const Eigen::Ref<const Eigen::MatrixXd>& Phi) const {
  check_coef_size(v_coef, Phi, "variance");
  return (Phi * v_coef).cwiseMax(v_floor);
}

Eigen::VectorXd RegressionAdjustment::mu_values(
    const Eigen::Ref<const Eigen::MatrixXd>& Phi) const {
  return y_values(Phi) - tau_values(Phi).cwiseProduct(e_values(Phi));
}

Eigen::VectorXd RegressionAdjustment::m_values(
    const Eigen::Ref<const Eigen::MatrixXd>& Phi,
    const Eigen::Ref<const Eigen::VectorXd>& W) const {
  if (W.size() != Phi.rows())
    throw std::invalid_argument("treatment vector does not match the basis rows");
  return y_values(Phi) + (W - e_values(Phi)).cwiseProduct(tau_values(Phi));
}

RegressionAdjustment fit_regression_adjustment(
    const Dataset& ds, const Eigen::Ref<const Eigen::MatrixXd>& Phi,
    const FoldAssignment& folds) {
  if (Phi.rows() != ds.n())
    throw std::invalid_argument("basis row count does not match the sample");
  if (Phi.cols() < 1 || (Phi.col(0).array() - 1.0).abs().maxCoeff() > 1e-12)
    throw std::invalid_argument("basis must have a leading constant column");
  if (folds.n() != ds.n())
    throw std::invalid_argument("fold assignment does not match the sample");

  RegressionAdjustment adj;
  adj.folds = folds;

  const LassoFit fy = lasso_cv(Phi, ds.Y, folds);
  adj.y_coef = fy.coef;
  adj.y_coef[0] += fy.intercept;

  const LassoFit fe = lasso_cv(Phi, ds.W, folds);
  adj.e_coef = fe.coef;
  adj.e_coef[0] += fe.intercept;

  const Fitter cv_fitter = [](const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const FoldAssignment& f) { return lasso_cv(X, y, f); };
  adj.m_oof = crossfit_oof(Phi, ds.Y, folds, cv_fitter);
  adj.e_oof = crossfit_oof(Phi, ds.W, folds, cv_fitter);

  adj.tau_coef = r_learner_tau(Phi, ds.W, ds.Y, adj.m_oof, adj.e_oof, folds);

  const Eigen::VectorXd r2 = (ds.W - adj.e_oof).array().square();
  const LassoFit fv = lasso_cv(Phi, r2, folds);
  adj.v_coef = fv.coef;
  adj.v_coef[0] += fv.intercept;

  const double wbar = ds.W.mean();
  const double var_w = (ds.W.array() - wbar).square().sum() / static_cast<double>(ds.n());
  adj.v_floor = std::max(0.01, 1e-3 * var_w);
  return adj;
}

}  // namespace aml
