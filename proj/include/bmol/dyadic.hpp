#pragma once

#include "bmol/space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bmol {

/// One Christ-type cube: a shifted half-open dyadic box intersected with the
/// point set. `center` is the geometric box center (it may fall outside the
/// unit cell for clipped boundary boxes on reflecting grids).
struct DyadicCube {
  int index = -1;
  int level = 0;           // side = 2^-level
  double side = 1.0;       // l(Q)
  Eigen::VectorXd center;  // geometric center, length dim
  int center_point = -1;   // member nearest to the geometric center
  std::vector<int> members;
  double mass = 0.0;
  int parent = -1;
  std::vector<int> children;
};

struct DyadicSystem {
  const Space* space = nullptr;
  int k_min = 0;
  int k_max = 0;
  double c1 = 0.25;
  double C1 = 2.0;
  Eigen::VectorXd shift;  // in [0,1)^dim
  std::vector<DyadicCube> cubes;
  std::vector<std::vector<int>> levels;      // cube indices per level k-k_min
  std::vector<std::vector<int>> point_cube;  // per level: point -> cube index

  int num_levels() const { return k_max - k_min + 1; }
  const DyadicCube& cube(int idx) const { return cubes[idx]; }
  int cube_at(int level, int point) const {
    return point_cube[level - k_min][point];
  }
  /// 2Q = Q union {x : dist(x,Q) <= l(Q)}; memoized per cube.
  const std::vector<int>& dilated_members(int cube_index) const;
  double dilated_mass(int cube_index) const;
  /// max over parent/child pairs of mu(2Q~)/mu(2Q), the discrete 2^n.
  double dilation_ratio_bound() const;

 private:
  mutable std::vector<std::optional<std::vector<int>>> dilated_cache_;
  mutable std::vector<double> dilated_mass_cache_;
  friend DyadicSystem build_shifted_dyadic(const Space&, const Eigen::VectorXd&,
                                           std::pair<int, int>);
};

/// Default level range: 0 .. floor(log2(side)).
std::pair<int, int> default_level_range(const Space& space);

DyadicSystem build_shifted_dyadic(const Space& space,
                                  const Eigen::VectorXd& shift,
                                  std::pair<int, int> k_range);

struct AxiomReport {
  struct Item {
    bool pass = true;
    std::string witness;  // empty when passing
  };
  Item nesting;         // cross-level coherence and parent links
  Item disjoint;        // per-level disjointness
  Item cover;           // per-level cover
  Item sandwich;        // inner/outer ball sandwich with c1, C1
  Item ancestor_balls;  // ball monotonicity along ancestor chains
  double best_c1 = 0.0;  // largest inner constant this system supports
  double best_C1 = 0.0;  // smallest outer constant this system supports
  bool all_pass() const {
    return nesting.pass && disjoint.pass && cover.pass && sandwich.pass &&
           ancestor_balls.pass;
  }
};

AxiomReport verify_axioms(const DyadicSystem& system);

struct LatticeEnsemble {
  const Space* space = nullptr;
  std::uint64_t seed = 0;
  int count = 0;
  std::vector<DyadicSystem> systems;
};

LatticeEnsemble sample_ensemble(const Space& space, int M, std::uint64_t seed);
LatticeEnsemble sample_ensemble(const Space& space, int M, std::uint64_t seed,
                                std::pair<int, int> k_range);

/// Fraction of ensemble members for which x lies within eps of its level-k
/// cube's complement (two-sided eps-boundary, strict inequality).
double boundary_hit_rate(const LatticeEnsemble& ensemble, int x, int k,
                         double eps);

/// mu(Q_t)/mu(Q) with Q_t = {x not in Q : dist(x,Q) <= t*l(Q)}.
double annulus_ratio(const DyadicSystem& system, const DyadicCube& Q, double t);

struct GradedSequence {
  const DyadicSystem* system = nullptr;
  double gamma = 0.5;
  std::vector<std::vector<int>> generations;  // cube indices, coarse to fine
};

struct GradedCheck {
  bool ok = true;
  int violations = 0;
  double worst_ratio = 0.0;  // max mu(E_k cap Q)/mu(Q) over previous-gen cubes
  std::string witness;
};

GradedCheck verify_graded(const GradedSequence& seq);

}  // namespace bmol
