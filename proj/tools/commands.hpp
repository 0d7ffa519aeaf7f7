#pragma once

#include <string>
#include <vector>

#include "run_config.hpp"

namespace aml::cli {

// Resolved arguments for one subcommand; main() fills these after applying
// flag-over-config precedence. All failure paths throw: std::invalid_argument
// and DataError for caller mistakes, std::runtime_error for I/O problems.

struct SimulateArgs {
  int setup = 1;
  long long n = 600;
  int d = 6;
  int k = 3;
  int reps = 0;
  int threads = 1;
  std::vector<std::string> methods;
  std::string out;  // summary CSV; the config sidecar lands at <out>.json
  RunConfig config;
};

struct EstimateArgs {
  std::string data;
  std::string estimand;       // mar-mean | ape-clm | shift
  std::string shift_targets;  // required for shift, rejected otherwise
  std::string method = "aml";
  std::string out;  // report JSON
  RunConfig config;
};

struct WeightsArgs {
  std::string data;
  std::string estimand;
  std::string shift_targets;
  std::string out;  // per-row CSV; diagnostics JSON lands at <out>.json
  RunConfig config;
};

void cmd_simulate(const SimulateArgs& a);
void cmd_estimate(const EstimateArgs& a);
void cmd_weights(const WeightsArgs& a);

}  // namespace aml::cli
