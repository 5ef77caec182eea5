#pragma once

#include "bmol/config.hpp"
#include "bmol/serialize.hpp"

#include <string>
#include <vector>

namespace bmol {

struct BenchRow {
  std::string function;
  std::string op;
  double bmo = 0.0;
  double epsilon = 0.0;
  double dist = 0.0;
  double ratio = 0.0;
  bool flagged = false;  // epsilon == 0: excluded from the bracket
};

struct BenchTable {
  std::vector<BenchRow> rows;
  double kappa_min = 0.0;
  double kappa_max = 0.0;
  int included = 0;
};

/// One row per (function, operator) with the distance/tail-rate bracket.
/// Requires at least three function specs.
BenchTable bench_distance_bracket(const RunConfig& config);
std::string bench_csv(const BenchTable& table);

/// Runs the configured pipelines, writing report.json and the CSV artifacts
/// into out_dir. Returns the process exit code (0 on success; pipeline
/// precondition failures are recorded in the report and do not abort).
int run_scenarios(const RunConfig& config, const std::string& out_dir);

}  // namespace bmol
