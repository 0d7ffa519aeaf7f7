#include "aml/estimators.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

namespace aml {

namespace {

// Per-row functional values of the fitted regression, its predictions at
// the observed treatments, and the plug-in value they average to.
struct FunctionalCore {
  Eigen::VectorXd h_vals;
  Eigen::VectorXd m_vals;
  double plugin = 0.0;
};

FunctionalCore functional_core(const CompiledEstimand& ce, const Dataset& ds,
                               const RegressionAdjustment& fit) {
  FunctionalCore core;
  switch (ce.spec.kind) {
    case EstimandKind::MarMean:
      core.h_vals = fit.mu_values(ce.Phi) + fit.tau_values(ce.Phi);  // m_hat(x, 1)
      core.m_vals = fit.m_values(ce.Phi, ds.W);
      core.plugin = core.h_vals.mean();
      break;
    case EstimandKind::ApeConditionallyLinear:
      core.h_vals = fit.tau_values(ce.Phi);
      core.m_vals = fit.m_values(ce.Phi, ds.W);
      core.plugin = core.h_vals.mean();
      break;
    case EstimandKind::DistributionShift:
      core.plugin = plugin_value(ce.spec, fit, ce.Phi);
      // The functional is known rather than a sample average, so the
      // per-row functional values are flat and all sampling variability
      // sits in the residual correction.
      core.h_vals = Eigen::VectorXd::Constant(ds.n(), core.plugin);
      core.m_vals = fit.y_values(ce.Phi);
      break;
  }
  return core;
}

FunctionalCore zero_core(const Dataset& ds) {
  FunctionalCore core;
  core.h_vals = Eigen::VectorXd::Zero(ds.n());
  core.m_vals = Eigen::VectorXd::Zero(ds.n());
  core.plugin = 0.0;
  return core;
}

struct RieszWeights {
  Eigen::VectorXd gamma;
  bool e_floored = false;
  bool v_floored = false;
};

// Unfloored conditional-variance evaluations, needed only by the average
// partial effect; other estimands never touch v_coef.
Eigen::VectorXd raw_variance_values(const Dataset& ds,
                                    const RegressionAdjustment& fit,
                                    const CompiledEstimand& ce) {
  if (ce.spec.kind != EstimandKind::ApeConditionallyLinear)
    return Eigen::VectorXd::Zero(ds.n());
  if (fit.v_coef.size() != ce.Phi.cols())
    throw std::invalid_argument("variance coefficients do not match the basis");
  return ce.Phi * fit.v_coef;
}

// Plug-in Riesz representer weights: W/e for the missing-at-random mean,
// (W - e)/v for the average partial effect. No closed form exists for a
// known-functional estimand (it would be a density ratio).
RieszWeights riesz_weights(const Dataset& ds, EstimandKind kind,
                           const Eigen::VectorXd& e_vals,
                           const Eigen::VectorXd& v_raw, double v_floor) {
  RieszWeights rw;
  rw.gamma.resize(ds.n());
  switch (kind) {
    case EstimandKind::MarMean:
      for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double e = std::max(e_vals[i], 0.01);
        if (ds.W[i] != 0.0 && e_vals[i] < 0.01) rw.e_floored = true;
        rw.gamma[i] = ds.W[i] / e;
      }
      break;
    case EstimandKind::ApeConditionallyLinear:
      for (Eigen::Index i = 0; i < ds.n(); ++i) {
        const double v = std::max(v_raw[i], v_floor);
        if (v_raw[i] < v_floor) rw.v_floored = true;
        rw.gamma[i] = (ds.W[i] - e_vals[i]) / v;
      }
      break;
    case EstimandKind::DistributionShift:
      throw std::invalid_argument(
          "no plug-in Riesz form exists for a known-functional estimand");
  }
  return rw;
}

EstimateReport assemble(const Dataset& ds, const FunctionalCore& core,
                        const Eigen::VectorXd& gamma, const CompiledEstimand& ce,
                        double alpha, const std::string& method, bool with_ci,
                        std::optional<double> gap, bool e_floored,
                        bool v_floored) {
  if (gamma.size() != ds.n())
    throw std::invalid_argument("weights do not match the sample");
  if (core.m_vals.size() != ds.n() || ds.Y.size() != ds.n())
    throw std::invalid_argument("estimate inputs do not match the sample");
  const double n = static_cast<double>(ds.n());
  const Eigen::VectorXd resid = ds.Y - core.m_vals;
  const double correction = gamma.cwiseProduct(resid).sum() / n;

  EstimateReport rep;
  rep.psi_hat = core.plugin + correction;
  rep.method = method;
  rep.diagnostics.imbalance = imbalance(ce.problem, gamma).total;
  rep.diagnostics.duality_gap = gap;
  rep.diagnostics.weight_l2 = gamma.squaredNorm() / (n * n);
  rep.diagnostics.plugin_term = core.plugin;
  rep.diagnostics.correction_term = correction;
  rep.diagnostics.e_floored = e_floored;
  rep.diagnostics.v_floored = v_floored;
  if (with_ci) {
    const double v_hat = variance_estimate(core.h_vals, rep.psi_hat, gamma, resid);
    const double se = std::sqrt(v_hat / n);
    const double z = normal_quantile_two_sided(alpha);
    rep.se = se;
    rep.ci_low = rep.psi_hat - z * se;
    rep.ci_high = rep.psi_hat + z * se;
  }
  return rep;
}

}  // namespace

double variance_estimate(const Eigen::Ref<const Eigen::VectorXd>& h_vals,
                         double psi_hat,
                         const Eigen::Ref<const Eigen::VectorXd>& gamma,
                         const Eigen::Ref<const Eigen::VectorXd>& residuals) {
  const Eigen::Index n = h_vals.size();
  if (gamma.size() != n || residuals.size() != n)
    throw std::invalid_argument("variance inputs have mismatched lengths");
  if (n == 0) return 0.0;
  const double centered = (h_vals.array() - psi_hat).square().sum();
  const double noise = gamma.cwiseProduct(residuals).squaredNorm();
  return (centered + noise) / static_cast<double>(n);
}

double normal_quantile_two_sided(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");
  if (std::abs(alpha - 0.05) <= 1e-12) return 1.959964;
  const boost::math::normal_distribution<double> normal;
  return boost::math::quantile(normal, 1.0 - alpha / 2.0);
}

EstimateReport aml_estimate(const Dataset& ds, const RegressionAdjustment& fit,
                            const WeightsSolution& ws, const CompiledEstimand& ce,
                            double alpha, const std::string& label) {
  const FunctionalCore core = functional_core(ce, ds, fit);
  return assemble(ds, core, ws.gamma, ce, alpha, label, true, ws.gap, false,
                  false);
}

EstimateReport mlin_estimate(const Dataset& ds, const WeightsSolution& ws,
                             const CompiledEstimand& ce) {
  return assemble(ds, zero_core(ds), ws.gamma, ce, 0.05, "mlin", false, ws.gap,
                  false, false);
}

EstimateReport dr_plugin_estimate(const Dataset& ds,
                                  const RegressionAdjustment& fit,
                                  const CompiledEstimand& ce, double alpha) {
  const FunctionalCore core = functional_core(ce, ds, fit);
  const Eigen::VectorXd v_raw = raw_variance_values(ds, fit, ce);
  const RieszWeights rw =
      riesz_weights(ds, ce.spec.kind, fit.e_values(ce.Phi), v_raw, fit.v_floor);
  return assemble(ds, core, rw.gamma, ce, alpha, "dr", true, std::nullopt,
                  rw.e_floored, rw.v_floored);
}

EstimateReport dr_oracle_estimate(const Dataset& ds,
                                  const RegressionAdjustment& fit,
                                  const Eigen::Ref<const Eigen::VectorXd>& oracle_e,
                                  const Eigen::Ref<const Eigen::VectorXd>& oracle_v,
                                  const CompiledEstimand& ce, double alpha) {
  if (oracle_e.size() != ds.n() || oracle_v.size() != ds.n())
    throw std::invalid_argument("oracle moments do not match the sample");
  const FunctionalCore core = functional_core(ce, ds, fit);
  const RieszWeights rw =
      riesz_weights(ds, ce.spec.kind, oracle_e, oracle_v, 0.01);
  EstimateReport rep = assemble(ds, core, rw.gamma, ce, alpha, "dr-oracle", true,
                                std::nullopt, rw.e_floored, rw.v_floored);
  return rep;
}

EstimateReport plugin_weight_estimate(const Dataset& ds,
                                      const RegressionAdjustment& fit,
                                      const CompiledEstimand& ce) {
  const Eigen::VectorXd v_raw = raw_variance_values(ds, fit, ce);
  const RieszWeights rw =
      riesz_weights(ds, ce.spec.kind, fit.e_values(ce.Phi), v_raw, fit.v_floor);
  return assemble(ds, zero_core(ds), rw.gamma, ce, 0.05, "plugin-riesz", false,
                  std::nullopt, rw.e_floored, rw.v_floored);
}

}  // namespace aml
