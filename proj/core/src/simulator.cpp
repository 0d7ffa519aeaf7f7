#include "aml/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>

#include "aml/estimand.hpp"
#include "aml/estimators.hpp"
#include "aml/nuisance.hpp"
#include "aml/rng.hpp"

namespace aml {

namespace {

constexpr std::uint64_t kDrawKey = 0x64726177ULL;  // "draw"
constexpr std::uint64_t kFoldKey = 0x666f6c64ULL;  // "fold"
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double sign(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

double clip(double t, double lo, double hi) {
  return std::min(std::max(t, lo), hi);
}

void validate(const SetupConfig& cfg) {
  if (cfg.setup_id < 1 || cfg.setup_id > 4)
    throw std::invalid_argument("setup must be one of 1..4");
  if (cfg.d < 1) throw std::invalid_argument("dimension d must be positive");
  if (cfg.k < 1 || cfg.k > cfg.d)
    throw std::invalid_argument("signal dimension k must satisfy 1 <= k <= d");
  if (cfg.setup_id == 2 && cfg.d < 2)
    throw std::invalid_argument("setup 2 needs d >= 2 for its effect function");
  if (cfg.n < 10) throw std::invalid_argument("sample size must be at least 10");
}

double draw_w(Rng& rng, int setup_id, const SetupSignal& s) {
  switch (setup_id) {
    case 1:
      return rng.beta(s.e, 1.0 - s.e);  // Beta(alpha, 1 - alpha), mean alpha
    case 2:
      // N(lambda, lambda^2); the stored mean is lambda itself.
      return s.e * (1.0 + rng.normal());
    case 3:
      return static_cast<double>(rng.poisson(s.e));
    case 4: {
      // log W ~ N(lambda, 1/9); the stored mean is exp(lambda + 1/18).
      const double lambda = std::log(s.e) - 1.0 / 18.0;
      return std::exp(lambda + rng.normal() / 3.0);
    }
    default:
      throw std::invalid_argument("setup must be one of 1..4");
  }
}

}  // namespace

SetupSignal setup_signal(int setup_id, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                         int d, int k) {
  if (x.size() != d) throw std::invalid_argument("covariate row does not match d");
  if (k < 1 || k > d)
    throw std::invalid_argument("signal dimension k must satisfy 1 <= k <= d");
  SetupSignal s;
  switch (setup_id) {
    case 1: {
      const double zeta = x.head(k).sum() / std::sqrt(static_cast<double>(k));
      const double eta = sign(zeta) * zeta * zeta;
      const double alpha = clip(logistic(eta), 0.05, 0.95);
      s.e = alpha;
      s.v = alpha * (1.0 - alpha) / 2.0;
      s.tau = -0.2;
      s.mu = eta + 0.2 * (alpha - 0.5);
      break;
    }
    case 2: {
      if (d < 2) throw std::invalid_argument("setup 2 needs d >= 2");
      const double eta = std::ldexp(x.head(k).prod(), k - 1);
      const double mu = sign(eta) * std::sqrt(std::abs(eta));
      const double lambda = 0.1 * sign(mu) + mu;
      s.mu = mu;
      s.tau = std::max(x[0] + x[1], 0.0) / 2.0;
      s.e = lambda;
      s.v = lambda * lambda;
      break;
    }
    case 3: {
      double tau = 0.0;
      for (int j = 0; j < k; ++j) tau += std::cos(M_PI * x[j] / 3.0);
      tau /= static_cast<double>(k);
      const double lambda = 0.2 + tau * tau;
      s.tau = tau;
      s.mu = 4.0 * x.sum() / static_cast<double>(d) + 2.0 * lambda;
      s.e = lambda;
      s.v = lambda;
      break;
    }
    case 4: {
      const double zeta = x.head(k).sum() / std::sqrt(static_cast<double>(k));
      const double lambda = logistic(sign(zeta) * zeta * zeta);
      s.mu = std::max(0.0, 2.0 * zeta);
      s.tau = std::sin(2.0 * M_PI * x[0]);
      s.e = std::exp(lambda + 1.0 / 18.0);
      s.v = (std::exp(1.0 / 9.0) - 1.0) * std::exp(2.0 * lambda + 1.0 / 9.0);
      break;
    }
    default:
      throw std::invalid_argument("setup must be one of 1..4");
  }
  return s;
}

std::pair<double, double> oracle_moments(int setup_id,
                                         const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                         int d, int k) {
  const SetupSignal s = setup_signal(setup_id, x, d, k);
  return {s.e, s.v};
}

double true_psi(int setup_id, int d, int k) {
  if (d < 1 || k < 1 || k > d)
    throw std::invalid_argument("signal dimension k must satisfy 1 <= k <= d");
  switch (setup_id) {
    case 1:
      return -0.2;
    case 2:
      // E max(x1 + x2, 0)/2 for x1 + x2 ~ N(0, 2).
      return 1.0 / (2.0 * std::sqrt(M_PI));
    case 3:
      // E cos(pi x / 3) for standard normal x.
      return std::exp(-M_PI * M_PI / 18.0);
    case 4:
      return 0.0;  // E sin(2 pi x1) = 0 by symmetry
    default:
      throw std::invalid_argument("setup must be one of 1..4");
  }
}

std::pair<Dataset, OracleAnnotations> draw_dataset(const SetupConfig& cfg, int rep) {
  validate(cfg);
  if (rep < 0) throw std::invalid_argument("replication index must be nonnegative");
  Rng rng = Rng::from_key({kDrawKey, cfg.seed,
                           static_cast<std::uint64_t>(cfg.setup_id),
                           static_cast<std::uint64_t>(rep)});
  Dataset ds;
  ds.X.resize(cfg.n, cfg.d);
  ds.W.resize(cfg.n);
  ds.Y.resize(cfg.n);
  OracleAnnotations ora;
  ora.e.resize(cfg.n);
  ora.v.resize(cfg.n);
  ora.tau.resize(cfg.n);
  ora.mu.resize(cfg.n);
  for (Eigen::Index i = 0; i < cfg.n; ++i) {
    for (int j = 0; j < cfg.d; ++j) ds.X(i, j) = rng.normal();
    const SetupSignal s = setup_signal(cfg.setup_id, ds.X.row(i), cfg.d, cfg.k);
    ds.W[i] = draw_w(rng, cfg.setup_id, s);
    ds.Y[i] = s.mu + ds.W[i] * s.tau + rng.normal();
    ora.e[i] = s.e;
    ora.v[i] = s.v;
    ora.tau[i] = s.tau;
    ora.mu[i] = s.mu;
  }
  return {std::move(ds), std::move(ora)};
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Mlin:
      return "mlin";
    case Method::Aml:
      return "aml";
    case Method::AmlPlus:
      return "aml+";
    case Method::DrPlugin:
      return "dr";
    case Method::DrOracle:
      return "dr-oracle";
    case Method::PluginRiesz:
      return "plugin-riesz";
  }
  throw std::logic_error("unknown method");
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "mlin") return Method::Mlin;
  if (name == "aml") return Method::Aml;
  if (name == "aml+") return Method::AmlPlus;
  if (name == "dr") return Method::DrPlugin;
  if (name == "dr-oracle") return Method::DrOracle;
  if (name == "plugin-riesz") return Method::PluginRiesz;
  return std::nullopt;
}

namespace {

struct Slot {
  bool ok = false;
  double psi = kNaN;
  bool has_ci = false;
  double se = kNaN;
  bool covered = false;
};

bool needs_ws(Method m) { return m == Method::Mlin || m == Method::Aml; }

void run_one_rep(const SetupConfig& cfg, const std::vector<Method>& methods,
                 const SimOptions& opt, double psi_true, int rep, Slot* out) {
  const auto shared = [&]() {
    auto drawn = draw_dataset(cfg, rep);
    const FoldAssignment folds =
        make_folds(drawn.first.n(), opt.folds,
                   derive_key({kFoldKey, cfg.seed,
                               static_cast<std::uint64_t>(cfg.setup_id),
                               static_cast<std::uint64_t>(rep)}));
    BasisSpec bspec;
    bspec.d = cfg.d;
    bspec.max_order = opt.basis_max_order;
    const Eigen::MatrixXd Phi = design_matrix(drawn.first.X, bspec);
    return std::make_tuple(std::move(drawn.first), std::move(drawn.second), folds,
                           Phi);
  };

  Dataset ds;
  OracleAnnotations ora;
  FoldAssignment folds;
  Eigen::MatrixXd Phi;
  RegressionAdjustment fit;
  CompiledEstimand ce;
  try {
    std::tie(ds, ora, folds, Phi) = shared();
    fit = fit_regression_adjustment(ds, Phi, folds);
    EstimandSpec spec;
    spec.kind = EstimandKind::ApeConditionallyLinear;
    ce = compile_estimand(ds, Phi, spec);
  } catch (...) {
    return;  // every slot for this replication stays failed
  }

  std::optional<WeightsSolution> ws;
  bool want_plain = false;
  bool want_plus = false;
  for (Method m : methods) {
    want_plain = want_plain || needs_ws(m);
    want_plus = want_plus || m == Method::AmlPlus;
  }
  if (want_plain) {
    try {
      ws = solve_weights(ce.problem, opt.solver);
    } catch (...) {
    }
  }
  std::optional<CompiledEstimand> ce_plus;
  std::optional<WeightsSolution> ws_plus;
  if (want_plus) {
    try {
      const Eigen::VectorXd e_in = fit.e_values(Phi);
      const Eigen::MatrixXd Psi = extended_features(ds.X, e_in, opt.extended);
      CompiledEstimand wide = ce;
      append_extended_block(wide.problem, ds, Psi, wide.spec.kind);
      ws_plus = solve_weights(wide.problem, opt.solver);
      ce_plus = std::move(wide);
    } catch (...) {
    }
  }

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    Slot& slot = out[mi];
    try {
      EstimateReport rep_out;
      switch (methods[mi]) {
        case Method::Mlin:
          if (!ws) throw std::runtime_error("weights unavailable");
          rep_out = mlin_estimate(ds, *ws, ce);
          break;
        case Method::Aml:
          if (!ws) throw std::runtime_error("weights unavailable");
          rep_out = aml_estimate(ds, fit, *ws, ce, opt.alpha, "aml");
          break;
        case Method::AmlPlus:
          if (!ws_plus || !ce_plus)
            throw std::runtime_error("extended weights unavailable");
          rep_out = aml_estimate(ds, fit, *ws_plus, *ce_plus, opt.alpha, "aml+");
          break;
        case Method::DrPlugin:
          rep_out = dr_plugin_estimate(ds, fit, ce, opt.alpha);
          break;
        case Method::DrOracle:
          rep_out = dr_oracle_estimate(ds, fit, ora.e, ora.v, ce, opt.alpha);
          break;
        case Method::PluginRiesz:
          rep_out = plugin_weight_estimate(ds, fit, ce);
          break;
      }
      if (!std::isfinite(rep_out.psi_hat))
        throw std::runtime_error("non-finite estimate");
      slot.ok = true;
      slot.psi = rep_out.psi_hat;
      if (rep_out.ci_low && rep_out.ci_high) {
        slot.has_ci = true;
        slot.se = *rep_out.se;
        slot.covered = *rep_out.ci_low <= psi_true && psi_true <= *rep_out.ci_high;
      }
    } catch (...) {
      slot = Slot{};
    }
  }
}

}  // namespace

std::vector<SummaryRow> run_replications(const SetupConfig& cfg,
                                         const std::vector<Method>& methods,
                                         int reps, int threads,
                                         const SimOptions& opt) {
  validate(cfg);
  if (reps < 1) throw std::invalid_argument("need at least one replication");
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  if (opt.folds < 2) throw std::invalid_argument("folds must be at least 2");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
    throw std::invalid_argument("alpha must lie in (0, 1)");

  const double psi_true = true_psi(cfg.setup_id, cfg.d, cfg.k);
  const std::size_t m = methods.size();
  std::vector<Slot> slots(static_cast<std::size_t>(reps) * m);

  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (;;) {
      const int r = next.fetch_add(1);
      if (r >= reps) break;
      run_one_rep(cfg, methods, opt, psi_true, r,
                  slots.data() + static_cast<std::size_t>(r) * m);
    }
  };
  const int pool = std::max(1, std::min(threads, reps));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::thread> team;
    team.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t) team.emplace_back(worker);
    for (auto& th : team) th.join();
  }

  // Sequential aggregation in slot order keeps the summary independent of
  // which thread produced which replication.
  std::vector<SummaryRow> rows;
  rows.reserve(m);
  for (std::size_t mi = 0; mi < m; ++mi) {
    SummaryRow row;
    row.method = method_name(methods[mi]);
    row.setup = cfg.setup_id;
    row.n = cfg.n;
    row.d = cfg.d;
    row.k = cfg.k;
    row.reps = reps;
    int ok = 0;
    int ci_count = 0;
    int covered = 0;
    double sum_err = 0.0;
    double sum_sq = 0.0;
    double sum_se = 0.0;
    for (int r = 0; r < reps; ++r) {
      const Slot& s = slots[static_cast<std::size_t>(r) * m + mi];
      if (!s.ok) continue;
      ++ok;
      const double err = s.psi - psi_true;
      sum_err += err;
      sum_sq += err * err;
      if (s.has_ci) {
        ++ci_count;
        sum_se += s.se;
        if (s.covered) ++covered;
      }
    }
    row.failures = reps - ok;
    row.bias = ok > 0 ? sum_err / ok : kNaN;
    row.rmse = ok > 0 ? std::sqrt(sum_sq / ok) : kNaN;
    row.coverage = ci_count > 0 ? static_cast<double>(covered) / ci_count : kNaN;
    row.mean_se = ci_count > 0 ? sum_se / ci_count : kNaN;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace aml
