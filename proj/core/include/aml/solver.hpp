#pragma once

#include <Eigen/Dense>
#include <vector>

#include "aml/estimand.hpp"

namespace aml {

// Minimax balancing weights: minimize I(gamma)^2 + (sigma^2/n^2) ||gamma||^2
// where I is the block imbalance functional. Solved through the penalized
// least-squares dual
//
//   min_beta D(beta) = (1/n)||G beta||^2 - 2 t'beta + (sigma^2/n) sum_b ||beta_b||_1^2
//
// by accelerated proximal gradient with adaptive restart; the weights are
// recovered as gamma = G beta and the duality gap certifies optimality.
struct SolverConfig {
  double sigma = 1.0;
  double tol_gap = 1e-7;  // relative duality gap at termination
  int max_iter = 50000;
  int power_iter = 100;   // power-method iterations for the step size
  bool record_trace = false;
};

struct SolverTracePoint {
  int iter;
  double primal;
  double dual;
};

struct WeightsSolution {
  Eigen::VectorXd gamma;
  std::vector<Eigen::VectorXd> beta;  // dual coefficients per block
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<SolverTracePoint> trace;  // filled when record_trace is set
};

WeightsSolution solve_weights(const BalanceProblem& bp,
                              const SolverConfig& cfg = {});

// argmin_x 1/2 ||x - v||^2 + c ||x||_1^2, via the sorted-threshold scan:
// the solution is coordinate-wise soft-thresholding of v at 2c||x*||_1.
Eigen::VectorXd prox_sq_l1(const Eigen::Ref<const Eigen::VectorXd>& v, double c);

double primal_objective(const BalanceProblem& bp,
                        const Eigen::Ref<const Eigen::VectorXd>& gamma,
                        double sigma);

// Dual value on the primal scale, -(sigma^2/n) D(beta); never exceeds the
// primal objective and matches it at the optimum.
double dual_objective(const BalanceProblem& bp,
                      const std::vector<Eigen::VectorXd>& beta, double sigma);

// Upper bound on the Lipschitz constant of the smooth dual gradient:
// power iteration on (2/n) G'G, inflated by a 1.05 safety factor.
double lipschitz_estimate(const BalanceProblem& bp, int power_iter = 100);

// High-precision reference for tiny instances (n <= 12, total columns <= 6):
// cyclic exact coordinate descent on the dual with random restarts, checked
// against a 1e-9 relative duality gap. Test harness use only.
WeightsSolution oracle_solve_small(const BalanceProblem& bp, double sigma);

}  // namespace aml
