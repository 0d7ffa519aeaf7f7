#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <utility>

#include "aml/basis.hpp"
#include "aml/dataset.hpp"
#include "aml/nuisance.hpp"
#include "aml/rng.hpp"
#include "aml/simulator.hpp"

namespace {

// Sparse linear signal with correlated columns; the shape the estimators
// feed the lasso after a basis expansion.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> make_design(Eigen::Index n,
                                                        Eigen::Index p) {
  aml::Rng rng(13);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double common = rng.normal();
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = rng.normal() + 0.3 * common;
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(p, 8); ++j)
    beta[j] = (j % 2 == 0 ? 1.0 : -0.5) / (1.0 + j);
  Eigen::VectorXd y = X * beta;
  for (Eigen::Index i = 0; i < n; ++i) y[i] += 0.5 * rng.normal();
  return {std::move(X), std::move(y)};
}

double lambda_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::VectorXd r = y.array() - y.mean();
  return (X.transpose() * r).cwiseAbs().maxCoeff() / static_cast<double>(X.rows());
}

void bench_lasso_cd(benchmark::State& state) {
  const auto [X, y] = make_design(400, state.range(0));
  const double lambda = 0.1 * lambda_max(X, y);
  for (auto _ : state) {
    const aml::LassoFit f = aml::lasso_cd(X, y, lambda);
    benchmark::DoNotOptimize(f.coef.data());
  }
}
BENCHMARK(bench_lasso_cd)->Arg(50)->Arg(200)->Arg(800);

void bench_lasso_cv(benchmark::State& state) {
  const auto [X, y] = make_design(400, 100);
  const aml::FoldAssignment folds = aml::make_folds(X.rows(), 10, 3);
  for (auto _ : state) {
    const aml::LassoFit f = aml::lasso_cv(X, y, folds);
    benchmark::DoNotOptimize(f.coef.data());
  }
}
BENCHMARK(bench_lasso_cv)->Unit(benchmark::kMillisecond);

void bench_design_matrix(benchmark::State& state) {
  aml::Rng rng(21);
  Eigen::MatrixXd X(1000, 6);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
  aml::BasisSpec basis;
  basis.d = 6;
  basis.max_order = 3;
  for (auto _ : state) {
    Eigen::MatrixXd Phi = aml::design_matrix(X, basis);
    benchmark::DoNotOptimize(Phi.data());
  }
}
BENCHMARK(bench_design_matrix);

// End to end cross-fit nuisance stack: outcome, propensity, effect and
// variance fits with fold-internal cross-validation.
void bench_fit_regression_adjustment(benchmark::State& state) {
  aml::SetupConfig cfg;
  cfg.setup_id = 2;
  cfg.n = state.range(0);
  cfg.d = 6;
  cfg.k = 2;
  cfg.seed = 5;
  const auto [ds, ann] = aml::draw_dataset(cfg, 0);
  aml::BasisSpec basis;
  basis.d = ds.d();
  basis.max_order = 3;
  const Eigen::MatrixXd Phi = aml::design_matrix(ds.X, basis);
  const aml::FoldAssignment folds = aml::make_folds(ds.n(), 10, 1);
  for (auto _ : state) {
    const aml::RegressionAdjustment fit =
        aml::fit_regression_adjustment(ds, Phi, folds);
    benchmark::DoNotOptimize(fit.y_coef.data());
  }
}
BENCHMARK(bench_fit_regression_adjustment)
    ->Arg(150)
    ->Arg(400)
    ->Unit(benchmark::kMillisecond);

}  // namespace
