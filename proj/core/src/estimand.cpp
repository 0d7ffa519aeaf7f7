#include "aml/estimand.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "aml/nuisance.hpp"

namespace aml {

namespace {

void check_phi(const Dataset& ds, const Eigen::Ref<const Eigen::MatrixXd>& Phi) {
  if (Phi.rows() != ds.n())
    throw std::invalid_argument("basis row count does not match the sample");
  if (Phi.cols() == 0) throw std::invalid_argument("basis has no columns");
  if (!Phi.allFinite()) throw std::invalid_argument("basis has non-finite entries");
}

Eigen::MatrixXd treated_design(const Dataset& ds,
                               const Eigen::Ref<const Eigen::MatrixXd>& Phi) {
  return Phi.array().colwise() * ds.W.array();
}

void check_coef(const Eigen::VectorXd& coef, Eigen::Index p, const char* what) {
  if (coef.size() != p)
    throw std::invalid_argument(std::string("regression adjustment is missing ") +
                                what + " coefficients for this basis");
}

}  // namespace

BalanceProblem build_mar(const Dataset& ds,
                         const Eigen::Ref<const Eigen::MatrixXd>& Phi) {
  check_phi(ds, Phi);
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    if (ds.W[i] != 0.0 && ds.W[i] != 1.0)
      throw std::invalid_argument("missing-at-random mean requires w in {0,1}");
  }
  BalanceProblem bp;
  bp.n = ds.n();
  bp.blocks.push_back({"main", treated_design(ds, Phi), Phi.colwise().mean()});
  return bp;
}

BalanceProblem build_ape_clm(const Dataset& ds,
                             const Eigen::Ref<const Eigen::MatrixXd>& Phi) {
  check_phi(ds, Phi);
  BalanceProblem bp;
  bp.n = ds.n();
  bp.blocks.push_back({"mu", Phi, Eigen::VectorXd::Zero(Phi.cols())});
  bp.blocks.push_back({"tau", treated_design(ds, Phi), Phi.colwise().mean()});
  return bp;
}

BalanceProblem build_dist_shift(const Dataset& ds,
                                const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                                const EstimandSpec& spec) {
  check_phi(ds, Phi);
  if (spec.kind != EstimandKind::DistributionShift)
    throw std::invalid_argument("estimand spec is not a distribution shift");
  if (spec.shift_targets.size() != Phi.cols())
    throw std::invalid_argument("shift targets do not match the basis dimension");
  if (!spec.shift_targets.allFinite())
    throw std::invalid_argument("shift targets have non-finite entries");
  BalanceProblem bp;
  bp.n = ds.n();
  bp.blocks.push_back({"main", Phi, spec.shift_targets});
  return bp;
}

void append_extended_block(BalanceProblem& bp, const Dataset& ds,
                           const Eigen::Ref<const Eigen::MatrixXd>& Psi,
                           EstimandKind kind) {
  if (Psi.rows() != bp.n)
    throw std::invalid_argument("extended features do not match the sample");
  if (Psi.cols() == 0) return;
  if (!Psi.allFinite())
    throw std::invalid_argument("extended features have non-finite entries");
  BalanceBlock blk;
  blk.label = "ext";
  switch (kind) {
    case EstimandKind::MarMean:
      blk.G = treated_design(ds, Psi);
      blk.t = Psi.colwise().mean();
      break;
    case EstimandKind::ApeConditionallyLinear: {
      // The widened class perturbs both the baseline and the effect surface,
      // so each partition column appears plain (balanced to zero) and
      // treatment-scaled (balanced to its sample mean).
      const Eigen::Index q = Psi.cols();
      blk.G.resize(bp.n, 2 * q);
      blk.G.leftCols(q) = Psi;
      blk.G.rightCols(q) = treated_design(ds, Psi);
      blk.t.setZero(2 * q);
      blk.t.tail(q) = Psi.colwise().mean();
      break;
    }
    case EstimandKind::DistributionShift:
      throw std::invalid_argument(
          "extended balance features are not defined for a known-functional "
          "estimand");
  }
  bp.blocks.push_back(std::move(blk));
}

ImbalanceReport imbalance(const BalanceProblem& bp,
                          const Eigen::Ref<const Eigen::VectorXd>& gamma) {
  if (gamma.size() != bp.n)
    throw std::invalid_argument("weight vector does not match the sample");
  ImbalanceReport rep;
  rep.per_block.reserve(bp.blocks.size());
  double ss = 0.0;
  for (const auto& b : bp.blocks) {
    const Eigen::VectorXd r =
        b.t - b.G.transpose() * gamma / static_cast<double>(bp.n);
    const double worst = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
    rep.per_block.push_back(worst);
    ss += worst * worst;
  }
  rep.total = std::sqrt(ss);
  return rep;
}

double plugin_value(const EstimandSpec& spec, const RegressionAdjustment& fit,
                    const Eigen::Ref<const Eigen::MatrixXd>& Phi) {
  const Eigen::Index p = Phi.cols();
  switch (spec.kind) {
    case EstimandKind::MarMean: {
      check_coef(fit.y_coef, p, "outcome");
      check_coef(fit.e_coef, p, "treatment");
      check_coef(fit.tau_coef, p, "effect");
      // m_hat(x, 1) = mu_hat(x) + tau_hat(x)
      return (fit.mu_values(Phi) + fit.tau_values(Phi)).mean();
    }
    case EstimandKind::ApeConditionallyLinear:
      check_coef(fit.tau_coef, p, "effect");
      return fit.tau_values(Phi).mean();
    case EstimandKind::DistributionShift:
      check_coef(fit.y_coef, p, "outcome");
      if (spec.shift_targets.size() != p)
        throw std::invalid_argument("shift targets do not match the basis dimension");
      return spec.shift_targets.dot(fit.y_coef);
  }
  throw std::logic_error("unknown estimand kind");
}

CompiledEstimand compile_estimand(const Dataset& ds,
                                  const Eigen::Ref<const Eigen::MatrixXd>& Phi,
                                  const EstimandSpec& spec) {
  CompiledEstimand ce;
  ce.spec = spec;
  ce.Phi = Phi;
  switch (spec.kind) {
    case EstimandKind::MarMean:
      ce.problem = build_mar(ds, Phi);
      break;
    case EstimandKind::ApeConditionallyLinear:
      ce.problem = build_ape_clm(ds, Phi);
      break;
    case EstimandKind::DistributionShift:
      ce.problem = build_dist_shift(ds, Phi, spec);
      break;
  }
  return ce;
}

}  // namespace aml
