#include "commands.hpp"

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aml/basis.hpp"
#include "aml/dataset.hpp"
#include "aml/estimand.hpp"
#include "aml/estimators.hpp"
#include "aml/nuisance.hpp"
#include "aml/simulator.hpp"
#include "aml/solver.hpp"
#include "json_writer.hpp"

namespace aml::cli {
namespace {

// Binary mode keeps outputs byte-identical across platforms.
void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

Dataset load_data(const std::string& path) {
  // A missing file is an I/O failure, not a schema violation; the two map
  // to different exit codes.
  if (!std::filesystem::exists(path))
    throw std::runtime_error("cannot open file: " + path);
  return load_csv(path);
}

// In-place column standardization; a constant column is centered only.
void standardize_columns(Eigen::MatrixXd& X) {
  const double denom = static_cast<double>(X.rows()) - 1.0;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    X.col(j).array() -= X.col(j).mean();
    const double sd = std::sqrt(X.col(j).squaredNorm() / denom);
    if (sd > 0.0) X.col(j) /= sd;
  }
}

// Whitespace-separated finite numbers, one per dictionary column.
Eigen::VectorXd load_targets(const std::string& path) {
  if (path.empty())
    throw std::invalid_argument("the shift estimand requires --shift-targets");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<double> vals;
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
      throw std::invalid_argument("non-numeric value '" + tok + "' in targets file");
    if (!std::isfinite(v))
      throw std::invalid_argument("non-finite value '" + tok + "' in targets file");
    vals.push_back(v);
  }
  if (vals.empty()) throw std::invalid_argument("targets file is empty: " + path);
  return Eigen::Map<const Eigen::VectorXd>(vals.data(),
                                           static_cast<Eigen::Index>(vals.size()));
}

EstimandKind parse_estimand(const std::string& name) {
  if (name == "mar-mean") return EstimandKind::MarMean;
  if (name == "ape-clm") return EstimandKind::ApeConditionallyLinear;
  if (name == "shift") return EstimandKind::DistributionShift;
  throw std::invalid_argument("unknown estimand '" + name + "'");
}

struct Prepared {
  Dataset ds;
  Eigen::MatrixXd Phi;
  CompiledEstimand ce;
  RegressionAdjustment fit;
  bool fitted = false;
  bool extended = false;
};

// Shared data -> basis -> balance-problem pipeline. Nuisances are fitted
// when the caller needs them or when the extended block needs an estimated
// treatment intensity.
Prepared prepare(const std::string& data_path, const std::string& estimand,
                 const std::string& targets_path, const RunConfig& cfg,
                 bool need_fit) {
  Prepared p;
  p.ds = load_data(data_path);
  if (cfg.standardize) standardize_columns(p.ds.X);

  BasisSpec basis = cfg.basis;
  basis.d = static_cast<int>(p.ds.d());
  p.Phi = design_matrix(p.ds.X, basis);

  EstimandSpec spec;
  spec.kind = parse_estimand(estimand);
  if (spec.kind == EstimandKind::DistributionShift)
    spec.shift_targets = load_targets(targets_path);
  else if (!targets_path.empty())
    throw std::invalid_argument("--shift-targets only applies to the shift estimand");
  p.ce = compile_estimand(p.ds, p.Phi, spec);

  if (need_fit || cfg.extended.enabled) {
    const FoldAssignment folds = make_folds(p.ds.n(), cfg.folds, cfg.seed);
    p.fit = fit_regression_adjustment(p.ds, p.Phi, folds);
    if (cfg.zero_regression) {
      p.fit.y_coef.setZero();
      p.fit.tau_coef.setZero();
    }
    p.fitted = true;
  }
  if (cfg.extended.enabled) {
    const Eigen::MatrixXd Psi =
        extended_features(p.ds.X, p.fit.e_values(p.Phi), cfg.extended);
    append_extended_block(p.ce.problem, p.ds, Psi, p.ce.spec.kind);
    p.extended = true;
  }
  return p;
}

JsonValue optional_number(const std::optional<double>& v) {
  return v ? JsonValue::number(*v) : JsonValue::null();
}

}  // namespace

void cmd_simulate(const SimulateArgs& a) {
  std::vector<Method> methods;
  for (const std::string& name : a.methods) {
    const auto m = parse_method(name);
    if (!m) throw std::invalid_argument("unknown method '" + name + "'");
    methods.push_back(*m);
  }

  SetupConfig cfg;
  cfg.setup_id = a.setup;
  cfg.n = static_cast<Eigen::Index>(a.n);
  cfg.d = a.d;
  cfg.k = a.k;
  cfg.seed = a.config.seed;

  SimOptions opt;
  opt.basis_max_order = a.config.basis.max_order;
  opt.extended = a.config.extended;
  opt.solver = a.config.solver;
  opt.folds = a.config.folds;
  opt.alpha = a.config.alpha;

  const std::vector<SummaryRow> rows =
      run_replications(cfg, methods, a.reps, a.threads, opt);

  std::string csv = "method,setup,n,d,k,reps,rmse,bias,coverage,mean_se,failures\n";
  for (const SummaryRow& r : rows) {
    csv += r.method + ',' + std::to_string(r.setup) + ',' + std::to_string(r.n) +
           ',' + std::to_string(r.d) + ',' + std::to_string(r.k) + ',' +
           std::to_string(r.reps) + ',' + format_double(r.rmse) + ',' +
           format_double(r.bias) + ',' + format_double(r.coverage) + ',' +
           format_double(r.mean_se) + ',' + std::to_string(r.failures) + '\n';
  }
  write_text_file(a.out, csv);

  // The sidecar records everything that determines the summary; thread
  // count is deliberately absent because it never changes the numbers.
  JsonValue names = JsonValue::array();
  for (const Method m : methods) names.push(JsonValue::string(method_name(m)));
  JsonValue doc = JsonValue::object();
  doc.add("setup", JsonValue::integer(a.setup))
      .add("n", JsonValue::integer(a.n))
      .add("d", JsonValue::integer(a.d))
      .add("k", JsonValue::integer(a.k))
      .add("reps", JsonValue::integer(a.reps))
      .add("methods", std::move(names))
      .add("config", config_json(a.config));
  write_text_file(a.out + ".json", doc.dump() + "\n");
}

void cmd_estimate(const EstimateArgs& a) {
  const RunConfig& cfg = a.config;
  Prepared p = prepare(a.data, a.estimand, a.shift_targets, cfg,
                       /*need_fit=*/a.method != "mlin");

  EstimateReport rep;
  if (a.method == "aml") {
    const WeightsSolution ws = solve_weights(p.ce.problem, cfg.solver);
    rep = aml_estimate(p.ds, p.fit, ws, p.ce, cfg.alpha,
                       p.extended ? "aml+" : "aml");
  } else if (a.method == "mlin") {
    const WeightsSolution ws = solve_weights(p.ce.problem, cfg.solver);
    rep = mlin_estimate(p.ds, ws, p.ce);
  } else if (a.method == "dr") {
    rep = dr_plugin_estimate(p.ds, p.fit, p.ce, cfg.alpha);
  } else if (a.method == "plugin-riesz") {
    rep = plugin_weight_estimate(p.ds, p.fit, p.ce);
  } else {
    throw std::invalid_argument("unknown method '" + a.method + "'");
  }

  JsonValue ci = JsonValue::null();
  if (rep.ci_low && rep.ci_high) {
    ci = JsonValue::array();
    ci.push(JsonValue::number(*rep.ci_low)).push(JsonValue::number(*rep.ci_high));
  }
  JsonValue diag = JsonValue::object();
  diag.add("imbalance", JsonValue::number(rep.diagnostics.imbalance))
      .add("duality_gap", optional_number(rep.diagnostics.duality_gap))
      .add("weight_l2", JsonValue::number(rep.diagnostics.weight_l2))
      .add("plugin_term", JsonValue::number(rep.diagnostics.plugin_term))
      .add("correction_term", JsonValue::number(rep.diagnostics.correction_term));

  JsonValue doc = JsonValue::object();
  doc.add("psi_hat", JsonValue::number(rep.psi_hat))
      .add("se", optional_number(rep.se))
      .add("ci", std::move(ci))
      .add("method", JsonValue::string(rep.method))
      .add("estimand", JsonValue::string(a.estimand))
      .add("n", JsonValue::integer(p.ds.n()))
      .add("diagnostics", std::move(diag))
      .add("config_echo", config_json(cfg));
  write_text_file(a.out, doc.dump() + "\n");
}

void cmd_weights(const WeightsArgs& a) {
  const RunConfig& cfg = a.config;
  const Prepared p =
      prepare(a.data, a.estimand, a.shift_targets, cfg, /*need_fit=*/false);
  const WeightsSolution ws = solve_weights(p.ce.problem, cfg.solver);

  std::string csv = "index,gamma\n";
  for (Eigen::Index i = 0; i < ws.gamma.size(); ++i)
    csv += std::to_string(i) + ',' + format_double(ws.gamma(i)) + '\n';
  write_text_file(a.out, csv);

  const ImbalanceReport rep = imbalance(p.ce.problem, ws.gamma);
  JsonValue per_block = JsonValue::object();
  for (std::size_t b = 0; b < p.ce.problem.blocks.size(); ++b)
    per_block.add(p.ce.problem.blocks[b].label, JsonValue::number(rep.per_block[b]));

  JsonValue doc = JsonValue::object();
  doc.add("primal", JsonValue::number(ws.primal))
      .add("dual", JsonValue::number(ws.dual))
      .add("gap", JsonValue::number(ws.gap))
      .add("iterations", JsonValue::integer(ws.iterations))
      .add("per_block_imbalance", std::move(per_block))
      .add("converged", JsonValue::boolean(ws.converged));
  write_text_file(a.out + ".json", doc.dump() + "\n");
}

}  // namespace aml::cli
