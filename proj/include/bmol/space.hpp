#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bmol {

enum class Boundary { periodic, reflecting };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

/// Finite metric measure space: point coordinates, pairwise distances and
/// positive weights. The discrete stand-in for a doubling (X, d, mu).
struct Space {
  int dim = 1;
  int side = 0;  // grid side when built by build_grid_space
  Boundary boundary = Boundary::reflecting;
  Eigen::MatrixXd coords;   // N x dim, coordinates in [0,1)^dim
  Eigen::MatrixXd dist;     // N x N symmetric, zero diagonal
  Eigen::VectorXd measure;  // length N, strictly positive
  double spacing = 0.0;     // smallest nonzero pairwise distance

  int size() const { return static_cast<int>(measure.size()); }
  double total_measure() const { return measure.sum(); }
  double diameter() const { return dist.maxCoeff(); }

  /// Closed ball {i : dist(center,i) <= radius}.
  std::vector<int> ball_members(int center, double radius) const;
  double ball_mass(int center, double radius) const;
  /// Point count within an open ball {i : dist(center,i) < radius}.
  std::vector<int> open_ball_members(int center, double radius) const;
};

/// Uniform 1-D or 2-D grid on [0,1)^dim with measure 1/side^dim per point.
/// Periodic mode uses the geodesic (wraparound) distance.
Space build_grid_space(int dim, int side, Boundary boundary);

/// Checks symmetry, zero diagonal, triangle inequality and positivity.
/// Throws std::invalid_argument naming the first violation. Full O(N^3)
/// triple scan for N <= 512, random sampling above.
void validate_space(const Space& space);

struct Ball {
  int center = 0;
  double radius = 0.0;
  std::vector<int> members;  // sorted
  double mass = 0.0;
};

/// All (center, r) balls with r on a geometric grid from spacing to diameter,
/// radii_per_octave values per factor 2, deduplicated by member set
/// (first occurrence kept; centers ascending, radii ascending).
std::vector<Ball> enumerate_balls(const Space& space, int radii_per_octave);

struct DoublingFit {
  double C_D = 1.0;
  double n_D = 0.0;
  // worst (ball, lambda) pair attaining the fitted exponent
  int witness_center = -1;
  double witness_radius = 0.0;
  double witness_lambda = 0.0;
  double witness_ratio = 0.0;
};

/// Smallest (C_D, n_D) with mu(B(x,lr)) <= C_D * l^n_D * mu(B(x,r)) over all
/// enumerated balls and l in {2,4,8}. C_D minimized first, then n_D on a
/// 0.05 grid.
DoublingFit doubling_fit(const Space& space, const std::vector<Ball>& balls);

/// Re-checks the fitted inequality on every ball; returns number of violations.
int doubling_violations(const Space& space, const std::vector<Ball>& balls,
                        const DoublingFit& fit);

}  // namespace bmol
