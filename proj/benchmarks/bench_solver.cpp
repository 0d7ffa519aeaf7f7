#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>

#include "aml/basis.hpp"
#include "aml/dataset.hpp"
#include "aml/estimand.hpp"
#include "aml/rng.hpp"
#include "aml/simulator.hpp"
#include "aml/solver.hpp"

namespace {

// One fixed dataset per (setup, n) pair so iterations time the solver alone.
aml::CompiledEstimand make_problem(int setup, Eigen::Index n,
                                   aml::EstimandKind kind) {
  aml::SetupConfig cfg;
  cfg.setup_id = setup;
  cfg.n = n;
  cfg.d = 6;
  cfg.k = 3;
  cfg.seed = 99;
  const auto [ds, ann] = aml::draw_dataset(cfg, 0);
  aml::BasisSpec basis;
  basis.d = ds.d();
  basis.max_order = 3;
  const Eigen::MatrixXd Phi = aml::design_matrix(ds.X, basis);
  aml::EstimandSpec spec;
  spec.kind = kind;
  return aml::compile_estimand(ds, Phi, spec);
}

void bench_solve_weights_ape(benchmark::State& state) {
  const auto ce = make_problem(2, state.range(0),
                               aml::EstimandKind::ApeConditionallyLinear);
  aml::SolverConfig cfg;
  for (auto _ : state) {
    const aml::WeightsSolution ws = aml::solve_weights(ce.problem, cfg);
    benchmark::DoNotOptimize(ws.gamma.data());
    state.counters["iters"] = static_cast<double>(ws.iterations);
  }
}
BENCHMARK(bench_solve_weights_ape)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);

// Binary treatment with covariate-dependent propensity; the simulator
// setups all have continuous W, so the MAR problem is drawn by hand.
aml::CompiledEstimand make_mar_problem(Eigen::Index n) {
  aml::Rng rng(17);
  aml::Dataset ds;
  ds.X.resize(n, 6);
  ds.W.resize(n);
  ds.Y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < 6; ++j) ds.X(i, j) = rng.normal();
    const double e = 1.0 / (1.0 + std::exp(-0.7 * ds.X(i, 0)));
    ds.W[i] = rng.uniform() < e ? 1.0 : 0.0;
    ds.Y[i] = ds.X(i, 0) + 0.5 * ds.W[i] + 0.3 * rng.normal();
  }
  aml::BasisSpec basis;
  basis.d = 6;
  basis.max_order = 3;
  const Eigen::MatrixXd Phi = aml::design_matrix(ds.X, basis);
  aml::EstimandSpec spec;
  spec.kind = aml::EstimandKind::MarMean;
  return aml::compile_estimand(ds, Phi, spec);
}

void bench_solve_weights_mar(benchmark::State& state) {
  const auto ce = make_mar_problem(state.range(0));
  aml::SolverConfig cfg;
  for (auto _ : state) {
    const aml::WeightsSolution ws = aml::solve_weights(ce.problem, cfg);
    benchmark::DoNotOptimize(ws.gamma.data());
    state.counters["iters"] = static_cast<double>(ws.iterations);
  }
}
BENCHMARK(bench_solve_weights_mar)->Arg(200)->Arg(600)->Arg(1200)->Unit(benchmark::kMillisecond);

void bench_prox_sq_l1(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  aml::Rng rng(7);
  Eigen::VectorXd v(p);
  for (Eigen::Index j = 0; j < p; ++j) v[j] = 2.0 * rng.normal();
  for (auto _ : state) {
    Eigen::VectorXd x = aml::prox_sq_l1(v, 0.25);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(bench_prox_sq_l1)->Range(64, 4096);

void bench_lipschitz_estimate(benchmark::State& state) {
  const auto ce = make_problem(2, state.range(0),
                               aml::EstimandKind::ApeConditionallyLinear);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aml::lipschitz_estimate(ce.problem, 100));
  }
}
BENCHMARK(bench_lipschitz_estimate)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
