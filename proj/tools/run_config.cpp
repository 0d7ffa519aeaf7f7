#include "run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace aml::cli {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::string& prefix,
                         std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known = known || it.key() == key;
    if (!known)
      throw std::invalid_argument("unknown config key '" + prefix + it.key() + "'");
  }
}

json section(const json& j, const std::string& name) {
  if (!j.contains(name)) return json::object();
  const json& v = j.at(name);
  if (!v.is_object())
    throw std::invalid_argument("config key '" + name + "' must be an object");
  return v;
}

double num(const json& j, const std::string& prefix, const std::string& name,
           double fallback) {
  if (!j.contains(name)) return fallback;
  const json& v = j.at(name);
  if (!v.is_number())
    throw std::invalid_argument("config key '" + prefix + name + "' must be a number");
  return v.get<double>();
}

int integer(const json& j, const std::string& prefix, const std::string& name,
            int fallback) {
  if (!j.contains(name)) return fallback;
  const json& v = j.at(name);
  if (!v.is_number_integer())
    throw std::invalid_argument("config key '" + prefix + name +
                                "' must be an integer");
  return v.get<int>();
}

bool boolean(const json& j, const std::string& prefix, const std::string& name,
             bool fallback) {
  if (!j.contains(name)) return fallback;
  const json& v = j.at(name);
  if (!v.is_boolean())
    throw std::invalid_argument("config key '" + prefix + name +
                                "' must be a boolean");
  return v.get<bool>();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file " + path + ": " + e.what());
  }
  if (!j.is_object())
    throw std::invalid_argument("config file " + path + " must hold a JSON object");

  reject_unknown_keys(j, "", {"solver", "basis", "extended", "folds", "alpha",
                              "seed", "zero_regression", "standardize"});

  const json solver = section(j, "solver");
  reject_unknown_keys(solver, "solver.", {"sigma", "tol_gap", "max_iter", "power_iter"});
  cfg.solver.sigma = num(solver, "solver.", "sigma", cfg.solver.sigma);
  cfg.solver.tol_gap = num(solver, "solver.", "tol_gap", cfg.solver.tol_gap);
  cfg.solver.max_iter = integer(solver, "solver.", "max_iter", cfg.solver.max_iter);
  cfg.solver.power_iter =
      integer(solver, "solver.", "power_iter", cfg.solver.power_iter);

  const json basis = section(j, "basis");
  reject_unknown_keys(basis, "basis.",
                      {"max_order", "normalize_weights", "include_intercept"});
  cfg.basis.max_order = integer(basis, "basis.", "max_order", cfg.basis.max_order);
  cfg.basis.normalize_weights =
      boolean(basis, "basis.", "normalize_weights", cfg.basis.normalize_weights);
  cfg.basis.include_intercept =
      boolean(basis, "basis.", "include_intercept", cfg.basis.include_intercept);

  const json extended = section(j, "extended");
  reject_unknown_keys(extended, "extended.",
                      {"enabled", "strata_widths", "dyadic_depth"});
  cfg.extended.enabled =
      boolean(extended, "extended.", "enabled", cfg.extended.enabled);
  cfg.extended.dyadic_depth =
      integer(extended, "extended.", "dyadic_depth", cfg.extended.dyadic_depth);
  if (extended.contains("strata_widths")) {
    const json& widths = extended.at("strata_widths");
    if (!widths.is_array())
      throw std::invalid_argument(
          "config key 'extended.strata_widths' must be an array of numbers");
    cfg.extended.strata_widths.clear();
    for (const json& w : widths) {
      if (!w.is_number())
        throw std::invalid_argument(
            "config key 'extended.strata_widths' must be an array of numbers");
      cfg.extended.strata_widths.push_back(w.get<double>());
    }
  }

  cfg.folds = integer(j, "", "folds", cfg.folds);
  cfg.alpha = num(j, "", "alpha", cfg.alpha);
  if (j.contains("seed")) {
    const json& v = j.at("seed");
    if (!v.is_number_unsigned())
      throw std::invalid_argument("config key 'seed' must be a nonnegative integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  cfg.zero_regression = boolean(j, "", "zero_regression", cfg.zero_regression);
  cfg.standardize = boolean(j, "", "standardize", cfg.standardize);
  return cfg;
}

JsonValue config_json(const RunConfig& cfg) {
  JsonValue solver = JsonValue::object();
  solver.add("sigma", JsonValue::number(cfg.solver.sigma))
      .add("tol_gap", JsonValue::number(cfg.solver.tol_gap))
      .add("max_iter", JsonValue::integer(cfg.solver.max_iter))
      .add("power_iter", JsonValue::integer(cfg.solver.power_iter));

  JsonValue basis = JsonValue::object();
  basis.add("max_order", JsonValue::integer(cfg.basis.max_order))
      .add("normalize_weights", JsonValue::boolean(cfg.basis.normalize_weights))
      .add("include_intercept", JsonValue::boolean(cfg.basis.include_intercept));

  JsonValue widths = JsonValue::array();
  for (const double w : cfg.extended.strata_widths) widths.push(JsonValue::number(w));
  JsonValue extended = JsonValue::object();
  extended.add("enabled", JsonValue::boolean(cfg.extended.enabled))
      .add("strata_widths", std::move(widths))
      .add("dyadic_depth", JsonValue::integer(cfg.extended.dyadic_depth));

  JsonValue root = JsonValue::object();
  root.add("solver", std::move(solver))
      .add("basis", std::move(basis))
      .add("extended", std::move(extended))
      .add("folds", JsonValue::integer(cfg.folds))
      .add("alpha", JsonValue::number(cfg.alpha))
      .add("seed", JsonValue::uinteger(cfg.seed))
      .add("zero_regression", JsonValue::boolean(cfg.zero_regression))
      .add("standardize", JsonValue::boolean(cfg.standardize));
  return root;
}

}  // namespace aml::cli
