#pragma once

#include "kgen/solver.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace kgen {

class ConfigError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct GenericChecks {
  int pairs = 20;
  int nx = 8;
  int n = 16;
  double L = 7.0;
  std::vector<std::pair<int, int>> refine{{8, 16}, {12, 24}, {16, 32}};  // (nx, n) for L dS
};

struct GrazingChecks {
  std::vector<double> eps{0.8, 0.4, 0.2, 0.1};
  std::string base = "sin2";  // sin2: sin^2(2 theta); constant
  std::vector<double> thetas{1e-1, 1e-2, 1e-3};
};

struct FisherChecks {
  int lambda_samples = 100;
  int lsi_samples = 200;
  int K = 128;
  double r_max = 10.0;
};

// Named pass thresholds; overridable from the command line.
std::map<std::string, double> default_tolerances();

struct RunConfig {
  SimConfig sim;
  GenericChecks generic;
  GrazingChecks grazing;
  FisherChecks fisher;
  std::map<std::string, double> tol = default_tolerances();
  std::string echo;  // normalised JSON of the parsed input
};

// JSON document with sections species, kernel, grid, run, initial and the
// optional checks and seed. Syntax errors report the line; field errors the path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// NAME=VALUE; NAME must be a known tolerance.
void apply_tolerance_override(RunConfig& cfg, const std::string& assignment);

}  // namespace kgen
