#pragma once

// Orchestration shared by the command-line tool and the acceptance checks.

#include "kgen/config.hpp"
#include "kgen/fisher.hpp"
#include "kgen/generic.hpp"
#include "kgen/grazing.hpp"
#include "kgen/report.hpp"
#include "kgen/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace kgen {

struct SimulateOutcome {
  Trajectory traj;
  HTheoremReport h;
  DriftReport drift;
  FisherHypothesis hypothesis;
  FisherReport fisher;
  std::vector<SuiteResult> suites;
};

// simulate + H-theorem audit + Fisher audit (+ conservation when projecting).
// An aborted run keeps its partial trajectory; suites are then left empty.
SimulateOutcome run_simulate(const RunConfig& cfg);

struct RefineRow {
  int nx = 0;
  int n = 0;
  double dx = 0;
  double l_dS = 0;
};

struct GenericOutcome {
  DegeneracyReport report;
  std::vector<RefineRow> refine;
  double l_dS_order = 0;
  bool l_dS_decreasing = true;
  std::vector<SuiteResult> suites;
};

GenericOutcome run_verify_generic(const RunConfig& cfg, bool sign_fault = false);

struct LemmaCase {
  std::string name;
  LemmaTable table;
};

struct GrazingOutcome {
  GrazingTable sweep;
  std::vector<LemmaCase> lemma;
  PerpTable perp;
  std::vector<SuiteResult> suites;
};

GrazingOutcome run_grazing(const RunConfig& cfg);

ScalarFunction grazing_base(const std::string& name);

void write_refine_csv(std::ostream& os, const std::vector<RefineRow>& rows);

}  // namespace kgen
