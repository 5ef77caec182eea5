#pragma once

#include "bmol/space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace bmol {

/// Named test-function generators shared by the CLI and the test suites.
/// center < 0 picks the point nearest the middle of the space.
struct FunctionSpec {
  std::string name = "log_singularity";  // constant | indicator |
                                         // log_singularity | spike |
                                         // random_bounded | file
  double scale = 1.0;
  int center = -1;
  double value = 1.0;         // constant level / spike height
  std::uint64_t seed = 1;     // random_bounded
  std::string path;           // file input: one value per line
};

Eigen::VectorXd generate_function(const Space& space, const FunctionSpec& spec);

/// Point nearest the geometric center of the unit cell.
int central_point(const Space& space);

std::vector<std::string> known_function_names();

}  // namespace bmol
