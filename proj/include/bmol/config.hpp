#pragma once

#include "bmol/functions.hpp"
#include "bmol/semigroup.hpp"
#include "bmol/space.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace bmol {

/// Scenario description: which space, operator, functions and pipelines to
/// run, plus the numeric knobs. Parsed from dotted key=value text or JSON.
struct RunConfig {
  int space_dim = 1;
  int space_side = 0;  // required
  Boundary space_boundary = Boundary::reflecting;

  OperatorKind operator_kind = OperatorKind::laplacian;
  double operator_potential = 1.0;      // constant V for schrodinger
  std::string operator_potential_file;  // optional per-point V
  double operator_lambda_b = 1.5;

  std::vector<FunctionSpec> functions;  // defaults to one log_singularity

  std::set<std::string> pipelines;  // subset of jn,gj,decompose,carleson,hardy

  int lattices = 25;
  std::uint64_t seed = 1;
  double theta = 0.125;
  double eps_factor = 1.1;
  double c0 = 2.0;
  int radii_per_octave = 2;
  std::vector<double> lambda_multipliers = {2.0, 4.0, 8.0};
  int max_iter = 10;
  double rho_target = 0.75;
};

/// Throws std::invalid_argument with a line-precise message on bad input.
/// JSON is accepted when the text starts with '{'.
RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

void validate_config(const RunConfig& config);

}  // namespace bmol
