#include "bmol/functions.hpp"

#include "bmol/rng.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace bmol {

int central_point(const Space& space) {
  Eigen::VectorXd mid = Eigen::VectorXd::Constant(space.dim, 0.5);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int p = 0; p < space.size(); ++p) {
    double d2 = 0.0;
    for (int k = 0; k < space.dim; ++k) {
      const double a = space.coords(p, k) - mid(k);
      d2 += a * a;
    }
    if (d2 < best_d) {
      best_d = d2;
      best = p;
    }
  }
  return best;
}

std::vector<std::string> known_function_names() {
  return {"constant", "indicator",      "log_singularity",
          "spike",    "random_bounded", "file"};
}

Eigen::VectorXd generate_function(const Space& space, const FunctionSpec& spec) {
  const int n = space.size();
  const int x0 = spec.center >= 0 ? spec.center : central_point(space);
  if (x0 >= n) throw std::invalid_argument("generate_function: center out of range");
  Eigen::VectorXd f(n);

  if (spec.name == "constant") {
    f.setConstant(spec.value);
  } else if (spec.name == "indicator") {
    for (int p = 0; p < n; ++p) f(p) = space.coords(p, 0) < 0.5 ? 1.0 : 0.0;
  } else if (spec.name == "log_singularity") {
    for (int p = 0; p < n; ++p)
      f(p) = std::log(1.0 / (space.dist(p, x0) + space.spacing));
  } else if (spec.name == "spike") {
    for (int p = 0; p < n; ++p)
      f(p) = std::sin(2.0 * std::numbers::pi * space.coords(p, 0));
    f(x0) += spec.value != 0.0 ? spec.value : 10.0;
  } else if (spec.name == "random_bounded") {
    CounterRng rng(spec.seed);
    for (int p = 0; p < n; ++p) f(p) = 2.0 * rng.uniform(p) - 1.0;
  } else if (spec.name == "file") {
    std::ifstream in(spec.path);
    if (!in)
      throw std::invalid_argument("generate_function: cannot open " + spec.path);
    for (int p = 0; p < n; ++p)
      if (!(in >> f(p)))
        throw std::invalid_argument("generate_function: " + spec.path +
                                    " has fewer than " + std::to_string(n) +
                                    " values");
  } else {
    throw std::invalid_argument("generate_function: unknown generator '" +
                                spec.name + "'");
  }
  return spec.scale * f;
}

}  // namespace bmol
