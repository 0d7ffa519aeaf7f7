#pragma once

#include <cstdint>
#include <string>

#include "aml/basis.hpp"
#include "aml/solver.hpp"
#include "json_writer.hpp"

namespace aml::cli {

// Run-level settings shared by every subcommand. Values come from an
// optional JSON config file; command-line flags override file values, which
// override the defaults below. The basis dimension is always taken from the
// data, never from the file.
struct RunConfig {
  SolverConfig solver;
  BasisSpec basis;
  ExtendedFeatureSpec extended;
  int folds = 10;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  bool zero_regression = false;  // zero the fitted outcome/effect coefficients
  bool standardize = false;      // center and scale covariates before the basis
};

// Parses the config file; an empty path yields the defaults. Malformed
// JSON, unknown keys and wrong value types raise std::invalid_argument; an
// unreadable file raises std::runtime_error.
RunConfig load_run_config(const std::string& path);

// Resolved settings in the same shape the config file uses, so an echoed
// config can be fed back in unchanged.
JsonValue config_json(const RunConfig& cfg);

}  // namespace aml::cli
