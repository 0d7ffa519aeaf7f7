#include "aml/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "aml/rng.hpp"

namespace aml {

namespace {

constexpr std::uint64_t kPowerKey = 0x706f776572ULL;   // "power"
constexpr std::uint64_t kOracleKey = 0x6f7261636cULL;  // "oracl"

// Column-concatenated blocks with the Gram matrix precomputed once; all
// per-iteration work happens in coefficient space.
struct Stacked {
  Eigen::MatrixXd G;                  // n x p
  Eigen::VectorXd t;                  // p
  Eigen::MatrixXd gram;               // G'G
  std::vector<Eigen::Index> offset;   // block starts, then total
  Eigen::Index n = 0;
};

Stacked stack(const BalanceProblem& bp) {
  if (bp.blocks.empty()) throw std::invalid_argument("balance problem has no blocks");
  if (bp.n < 1) throw std::invalid_argument("balance problem has no rows");
  Stacked s;
  s.n = bp.n;
  s.G.resize(bp.n, bp.total_cols());
  s.t.resize(bp.total_cols());
  Eigen::Index at = 0;
  for (const auto& b : bp.blocks) {
    if (b.G.rows() != bp.n) throw std::invalid_argument("block rows do not match n");
    if (b.G.cols() != b.t.size())
      throw std::invalid_argument("block targets do not match its design");
    if (!b.G.allFinite() || !b.t.allFinite())
      throw std::invalid_argument("balance problem has non-finite entries");
    s.offset.push_back(at);
    s.G.middleCols(at, b.G.cols()) = b.G;
    s.t.segment(at, b.t.size()) = b.t;
    at += b.G.cols();
  }
  s.offset.push_back(at);
  s.gram.noalias() = s.G.transpose() * s.G;
  return s;
}

std::vector<Eigen::VectorXd> split_blocks(const Stacked& s,
                                          const Eigen::VectorXd& beta) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(s.offset.size() - 1);
  for (std::size_t b = 0; b + 1 < s.offset.size(); ++b)
    out.push_back(beta.segment(s.offset[b], s.offset[b + 1] - s.offset[b]));
  return out;
}

// Objective pair computed from the cached Gram product u = gram * beta:
// the primal is evaluated at the recovered gamma = G beta, whose block
// residuals are t - u/n and whose squared norm is beta'u.
struct GapEval {
  double primal;
  double dual;
};

GapEval evaluate(const Stacked& s, const Eigen::VectorXd& beta,
                 const Eigen::VectorXd& u, double sigma) {
  const double n = static_cast<double>(s.n);
  const double gamma_sq = beta.dot(u);
  double imb_sq = 0.0;
  double l1_sq = 0.0;
  for (std::size_t b = 0; b + 1 < s.offset.size(); ++b) {
    const Eigen::Index lo = s.offset[b];
    const Eigen::Index len = s.offset[b + 1] - lo;
    const double worst =
        (s.t.segment(lo, len) - u.segment(lo, len) / n).cwiseAbs().maxCoeff();
    imb_sq += worst * worst;
    const double l1 = beta.segment(lo, len).cwiseAbs().sum();
    l1_sq += l1 * l1;
  }
  const double sig2 = sigma * sigma;
  GapEval ev;
  ev.primal = imb_sq + sig2 / (n * n) * gamma_sq;
  const double d = gamma_sq / n - 2.0 * s.t.dot(beta) + sig2 / n * l1_sq;
  ev.dual = -(sig2 / n) * d;
  return ev;
}

void prox_blocks(const Stacked& s, const Eigen::VectorXd& v, double c,
                 Eigen::VectorXd& out) {
  for (std::size_t b = 0; b + 1 < s.offset.size(); ++b) {
    const Eigen::Index lo = s.offset[b];
    const Eigen::Index len = s.offset[b + 1] - lo;
    out.segment(lo, len) = prox_sq_l1(v.segment(lo, len), c);
  }
}

double power_lambda_max(const Eigen::MatrixXd& gram, int iters) {
  const Eigen::Index p = gram.rows();
  if (p == 0) return 0.0;
  Rng rng = Rng::from_key({kPowerKey, static_cast<std::uint64_t>(p)});
  Eigen::VectorXd v(p);
  for (Eigen::Index j = 0; j < p; ++j) v[j] = rng.normal();
  double nv = v.norm();
  if (nv == 0.0) {
    v.setOnes();
    nv = v.norm();
  }
  v /= nv;
  double lambda = 0.0;
  Eigen::VectorXd w(p);
  for (int it = 0; it < iters; ++it) {
    w.noalias() = gram * v;
    lambda = w.norm();
    if (lambda == 0.0) return 0.0;
    v = w / lambda;
  }
  return lambda;
}

}  // namespace

Eigen::VectorXd prox_sq_l1(const Eigen::Ref<const Eigen::VectorXd>& v, double c) {
  if (c < 0.0) throw std::invalid_argument("prox coefficient must be nonnegative");
  const Eigen::Index p = v.size();
  if (c == 0.0 || p == 0) return v;
  // x = soft(v, theta) with theta = 2c ||x||_1; on the candidate support of
  // the k largest magnitudes, theta_k = 2c S_k / (1 + 2ck). The valid k is
  // the largest with |v|_(k) > theta_k.
  std::vector<double> w(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) w[static_cast<std::size_t>(j)] = std::abs(v[j]);
  std::sort(w.begin(), w.end(), std::greater<double>());
  double run = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 1; k <= p; ++k) {
    const double wk = w[static_cast<std::size_t>(k - 1)];
    const double cand = 2.0 * c * (run + wk) / (1.0 + 2.0 * c * static_cast<double>(k));
    if (wk > cand) {
      run += wk;
      theta = cand;
    } else {
      break;
    }
  }
  Eigen::VectorXd x(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mag = std::abs(v[j]) - theta;
    x[j] = mag > 0.0 ? (v[j] > 0.0 ? mag : -mag) : 0.0;
  }
  return x;
}

double primal_objective(const BalanceProblem& bp,
                        const Eigen::Ref<const Eigen::VectorXd>& gamma,
                        double sigma) {
  const double n = static_cast<double>(bp.n);
  const ImbalanceReport rep = imbalance(bp, gamma);
  return rep.total * rep.total + sigma * sigma / (n * n) * gamma.squaredNorm();
}

double dual_objective(const BalanceProblem& bp,
                      const std::vector<Eigen::VectorXd>& beta, double sigma) {
  if (beta.size() != bp.blocks.size())
    throw std::invalid_argument("dual coefficients do not match the blocks");
  const double n = static_cast<double>(bp.n);
  Eigen::VectorXd gb = Eigen::VectorXd::Zero(bp.n);
  double lin = 0.0;
  double l1_sq = 0.0;
  for (std::size_t b = 0; b < beta.size(); ++b) {
    if (beta[b].size() != bp.blocks[b].G.cols())
      throw std::invalid_argument("dual coefficients do not match a block");
    gb.noalias() += bp.blocks[b].G * beta[b];
    lin += bp.blocks[b].t.dot(beta[b]);
    const double l1 = beta[b].cwiseAbs().sum();
    l1_sq += l1 * l1;
  }
  const double sig2 = sigma * sigma;
  const double d = gb.squaredNorm() / n - 2.0 * lin + sig2 / n * l1_sq;
  return -(sig2 / n) * d;
}

double lipschitz_estimate(const BalanceProblem& bp, int power_iter) {
  const Stacked s = stack(bp);
  const double lam = power_lambda_max(s.gram, power_iter);
  return 2.0 / static_cast<double>(s.n) * lam * 1.05;
}

WeightsSolution solve_weights(const BalanceProblem& bp, const SolverConfig& cfg) {
  if (cfg.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  if (cfg.tol_gap <= 0.0) throw std::invalid_argument("tol_gap must be positive");
  const Stacked s = stack(bp);
  const double n = static_cast<double>(s.n);
  const double sig2 = cfg.sigma * cfg.sigma;
  const Eigen::Index p = s.t.size();

  const double L =
      std::max(2.0 / n * power_lambda_max(s.gram, cfg.power_iter) * 1.05, 1e-12);
  const double c_prox = sig2 / n / L;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd x_prev = x;
  Eigen::VectorXd y = x;
  Eigen::VectorXd grad(p), v(p), u(p);
  double tk = 1.0;

  WeightsSolution sol;
  sol.gamma = Eigen::VectorXd::Zero(s.n);

  const int check_every = 10;
  int iter = 0;
  bool converged = false;
  for (iter = 1; iter <= cfg.max_iter; ++iter) {
    grad.noalias() = 2.0 / n * (s.gram * y);
    grad -= 2.0 * s.t;
    v = y - grad / L;
    prox_blocks(s, v, c_prox, x);

    // Adaptive restart: drop momentum when the step opposes the previous
    // direction of travel.
    const double sign = (y - x).dot(x - x_prev);
    if (sign > 0.0) {
      tk = 1.0;
      y = x;
    } else {
      const double tk1 = (1.0 + std::sqrt(1.0 + 4.0 * tk * tk)) / 2.0;
      y = x + ((tk - 1.0) / tk1) * (x - x_prev);
      tk = tk1;
    }
    x_prev = x;

    const bool check = iter == 1 || iter % check_every == 0;
    if (check || cfg.record_trace) {
      u.noalias() = s.gram * x;
      const GapEval ev = evaluate(s, x, u, cfg.sigma);
      if (!std::isfinite(ev.primal) || !std::isfinite(ev.dual))
        throw std::runtime_error("balance solver produced a non-finite objective");
      if (cfg.record_trace) sol.trace.push_back({iter, ev.primal, ev.dual});
      if (check &&
          (ev.primal - ev.dual) <= cfg.tol_gap * (1.0 + std::abs(ev.primal))) {
        converged = true;
        break;
      }
    }
  }

  sol.iterations = std::min(iter, cfg.max_iter);
  sol.beta = split_blocks(s, x);
  sol.gamma.noalias() = s.G * x;
  sol.primal = primal_objective(bp, sol.gamma, cfg.sigma);
  sol.dual = dual_objective(bp, sol.beta, cfg.sigma);
  sol.gap = sol.primal - sol.dual;
  sol.converged =
      converged && sol.gap <= cfg.tol_gap * (1.0 + std::abs(sol.primal)) + 1e-12;
  return sol;
}

WeightsSolution oracle_solve_small(const BalanceProblem& bp, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  const Stacked s = stack(bp);
  if (s.n > 12 || s.t.size() > 6)
    throw std::invalid_argument("oracle solver is restricted to tiny instances");
  const double n = static_cast<double>(s.n);
  const double sig2 = sigma * sigma;
  const double c = sig2 / n;
  const Eigen::Index p = s.t.size();

  // Block id per column, for the coupled |.|_1 term of the exact update.
  std::vector<std::size_t> block_of(static_cast<std::size_t>(p));
  for (std::size_t b = 0; b + 1 < s.offset.size(); ++b)
    for (Eigen::Index j = s.offset[b]; j < s.offset[b + 1]; ++j)
      block_of[static_cast<std::size_t>(j)] = b;

  const auto dual_value = [&](const Eigen::VectorXd& beta) {
    double l1_sq = 0.0;
    for (std::size_t b = 0; b + 1 < s.offset.size(); ++b) {
      const double l1 =
          beta.segment(s.offset[b], s.offset[b + 1] - s.offset[b]).cwiseAbs().sum();
      l1_sq += l1 * l1;
    }
    return (s.G * beta).squaredNorm() / n - 2.0 * s.t.dot(beta) + c * l1_sq;
  };

  Eigen::VectorXd best;
  double best_val = std::numeric_limits<double>::infinity();
  int sweeps_total = 0;
  const double scale =
      std::max(1.0, s.t.cwiseAbs().maxCoeff() * n / std::max(sig2, 1e-12));
  for (int restart = 0; restart < 20; ++restart) {
    Eigen::VectorXd beta(p);
    if (restart == 0) {
      beta.setZero();
    } else {
      Rng rng = Rng::from_key({kOracleKey, static_cast<std::uint64_t>(restart)});
      for (Eigen::Index j = 0; j < p; ++j) beta[j] = rng.normal() * scale;
    }
    Eigen::VectorXd gb = s.G * beta;
    for (int sweep = 0; sweep < 200000; ++sweep) {
      ++sweeps_total;
      double max_move = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double old = beta[j];
        const std::size_t b = block_of[static_cast<std::size_t>(j)];
        double rest = 0.0;
        for (Eigen::Index jj = s.offset[b]; jj < s.offset[b + 1]; ++jj)
          if (jj != j) rest += std::abs(beta[jj]);
        // min over x of A x^2 + B x + 2 c R |x| + const, with the j-th
        // column removed from the cached product.
        const double a = s.gram(j, j) / n + c;
        const double bb =
            2.0 / n * (s.G.col(j).dot(gb) - s.gram(j, j) * old) - 2.0 * s.t[j];
        double xnew = 0.0;
        const double mag = std::abs(bb) - 2.0 * c * rest;
        if (mag > 0.0 && a > 0.0) xnew = -(bb > 0.0 ? mag : -mag) / (2.0 * a);
        if (xnew != old) {
          gb += (xnew - old) * s.G.col(j);
          beta[j] = xnew;
          max_move = std::max(max_move, std::abs(xnew - old));
        }
      }
      if (max_move <= 1e-12) break;
    }
    const double val = dual_value(beta);
    if (val < best_val) {
      best_val = val;
      best = beta;
    }
  }

  WeightsSolution sol;
  sol.beta = split_blocks(s, best);
  sol.gamma = s.G * best;
  sol.primal = primal_objective(bp, sol.gamma, sigma);
  sol.dual = dual_objective(bp, sol.beta, sigma);
  sol.gap = sol.primal - sol.dual;
  sol.iterations = sweeps_total;
  sol.converged = sol.gap <= 1e-9 * (1.0 + std::abs(sol.primal));
  if (!sol.converged)
    throw std::runtime_error("oracle solver failed its duality-gap check");
  return sol;
}

}  // namespace aml
