#include "bmol/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

namespace bmol {

std::string to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "reflecting";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "reflecting") return Boundary::reflecting;
  throw std::invalid_argument("unknown boundary mode '" + s +
                              "' (expected periodic or reflecting)");
}

std::vector<int> Space::ball_members(int center, double radius) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (dist(center, i) <= radius) out.push_back(i);
  }
  return out;
}

double Space::ball_mass(int center, double radius) const {
  double m = 0.0;
  for (int i = 0; i < size(); ++i) {
    if (dist(center, i) <= radius) m += measure(i);
  }
  return m;
}

std::vector<int> Space::open_ball_members(int center, double radius) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (dist(center, i) < radius) out.push_back(i);
  }
  return out;
}

namespace {

double axis_distance(double a, double b, Boundary boundary) {
  double d = std::abs(a - b);
  if (boundary == Boundary::periodic) d = std::min(d, 1.0 - d);
  return d;
}

}  // namespace

Space build_grid_space(int dim, int side, Boundary boundary) {
  if (dim != 1 && dim != 2)
    throw std::invalid_argument("build_grid_space: dim must be 1 or 2");
  if (side < 2) throw std::invalid_argument("build_grid_space: side must be >= 2");
  const std::int64_t total =
      dim == 1 ? side : static_cast<std::int64_t>(side) * side;
  if (total > 65536)
    throw std::invalid_argument(
        "build_grid_space: side^dim = " + std::to_string(total) +
        " exceeds the 65536 point limit");

  Space s;
  s.dim = dim;
  s.side = side;
  s.boundary = boundary;
  const int n = static_cast<int>(total);
  const double h = 1.0 / side;
  s.spacing = h;
  s.coords.resize(n, dim);
  if (dim == 1) {
    for (int i = 0; i < n; ++i) s.coords(i, 0) = i * h;
  } else {
    for (int i = 0; i < n; ++i) {
      s.coords(i, 0) = (i % side) * h;
      s.coords(i, 1) = (i / side) * h;
    }
  }
  s.measure = Eigen::VectorXd::Constant(n, 1.0 / n);
  s.dist.resize(n, n);
  for (int i = 0; i < n; ++i) {
    s.dist(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const double a = axis_distance(s.coords(i, k), s.coords(j, k), boundary);
        d2 += a * a;
      }
      const double d = std::sqrt(d2);
      s.dist(i, j) = d;
      s.dist(j, i) = d;
    }
  }
  return s;
}

void validate_space(const Space& space) {
  const int n = space.size();
  if (n == 0) throw std::invalid_argument("space: empty point set");
  if (space.dist.rows() != n || space.dist.cols() != n)
    throw std::invalid_argument("space: dist shape does not match point count");
  for (int i = 0; i < n; ++i) {
    if (space.measure(i) <= 0.0)
      throw std::invalid_argument("space: measure(" + std::to_string(i) +
                                  ") is not positive");
    if (space.dist(i, i) != 0.0)
      throw std::invalid_argument("space: dist(" + std::to_string(i) + "," +
                                  std::to_string(i) + ") nonzero");
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (space.dist(i, j) < 0.0)
        throw std::invalid_argument("space: negative distance");
      if (space.dist(i, j) != space.dist(j, i))
        throw std::invalid_argument("space: dist not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) +
                                    ")");
    }
  const double tol = 1e-12;
  auto check_triple = [&](int i, int j, int k) {
    if (space.dist(i, k) > space.dist(i, j) + space.dist(j, k) + tol)
      throw std::invalid_argument(
          "space: triangle inequality fails at (" + std::to_string(i) + "," +
          std::to_string(j) + "," + std::to_string(k) + ")");
  };
  if (n <= 512) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) check_triple(i, j, k);
  } else {
    std::uint64_t state = 0x9e3779b97f4a7c15ULL;
    auto next = [&state]() {
      state += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = state;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    for (int t = 0; t < 200000; ++t) {
      const int i = static_cast<int>(next() % n);
      const int j = static_cast<int>(next() % n);
      const int k = static_cast<int>(next() % n);
      check_triple(i, j, k);
    }
  }
}

std::vector<Ball> enumerate_balls(const Space& space, int radii_per_octave) {
  if (radii_per_octave < 1)
    throw std::invalid_argument("enumerate_balls: radii_per_octave must be >= 1");
  const int n = space.size();
  std::vector<double> radii;
  const double r0 = space.spacing;
  const double rmax = space.diameter();
  if (rmax <= 0.0 || r0 <= 0.0) {
    radii.push_back(std::max(rmax, 1.0));  // degenerate single-point space
  } else {
    const double step = std::pow(2.0, 1.0 / radii_per_octave);
    for (double r = r0; r < rmax * (1.0 + 1e-12); r *= step)
      radii.push_back(std::min(r, rmax));
    if (radii.empty() || radii.back() < rmax * (1.0 - 1e-12))
      radii.push_back(rmax);
  }

  std::vector<Ball> balls;
  std::map<std::vector<int>, int> seen;
  for (int c = 0; c < n; ++c) {
    for (double r : radii) {
      Ball b;
      b.center = c;
      b.radius = r;
      b.members = space.ball_members(c, r);
      if (b.members.empty()) continue;
      if (seen.count(b.members)) continue;
      for (int i : b.members) b.mass += space.measure(i);
      seen.emplace(b.members, static_cast<int>(balls.size()));
      balls.push_back(std::move(b));
    }
  }
  return balls;
}

DoublingFit doubling_fit(const Space& space, const std::vector<Ball>& balls) {
  if (balls.empty()) throw std::invalid_argument("doubling_fit: no balls");
  static const double lambdas[] = {2.0, 4.0, 8.0};
  DoublingFit fit;
  double worst_exponent = 0.0;
  for (const Ball& b : balls) {
    for (double lam : lambdas) {
      const double big = space.ball_mass(b.center, lam * b.radius);
      const double ratio = big / b.mass;
      if (ratio <= 1.0) continue;
      const double e = std::log(ratio) / std::log(lam);
      if (e > worst_exponent) {
        worst_exponent = e;
        fit.witness_center = b.center;
        fit.witness_radius = b.radius;
        fit.witness_lambda = lam;
        fit.witness_ratio = ratio;
      }
    }
  }
  // C_D = 1 is always attainable for some exponent; snap n_D up to a 0.05 grid.
  fit.C_D = 1.0;
  fit.n_D = std::ceil(worst_exponent / 0.05 - 1e-9) * 0.05;
  if (fit.n_D < 0.0) fit.n_D = 0.0;
  return fit;
}

int doubling_violations(const Space& space, const std::vector<Ball>& balls,
                        const DoublingFit& fit) {
  static const double lambdas[] = {2.0, 4.0, 8.0};
  int bad = 0;
  for (const Ball& b : balls)
    for (double lam : lambdas) {
      const double big = space.ball_mass(b.center, lam * b.radius);
      if (big > fit.C_D * std::pow(lam, fit.n_D) * b.mass * (1.0 + 1e-12)) ++bad;
    }
  return bad;
}

}  // namespace bmol
