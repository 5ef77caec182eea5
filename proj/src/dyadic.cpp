#include "bmol/dyadic.hpp"

#include "bmol/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bmol {

namespace {

double coord_axis_distance(double a, double b, Boundary boundary) {
  double d = std::abs(a - b);
  if (boundary == Boundary::periodic) {
    d = std::fmod(d, 1.0);
    d = std::min(d, 1.0 - d);
  }
  return d;
}

double coord_distance(const Space& space, const Eigen::VectorXd& c, int point) {
  double d2 = 0.0;
  for (int k = 0; k < space.dim; ++k) {
    const double a =
        coord_axis_distance(c(k), space.coords(point, k), space.boundary);
    d2 += a * a;
  }
  return std::sqrt(d2);
}

double frac(double x) { return x - std::floor(x); }

}  // namespace

std::pair<int, int> default_level_range(const Space& space) {
  if (space.side <= 0)
    throw std::invalid_argument("default_level_range: space was not grid-built");
  const int kmax = static_cast<int>(std::floor(std::log2(space.side) + 1e-9));
  return {0, kmax};
}

const std::vector<int>& DyadicSystem::dilated_members(int cube_index) const {
  if (dilated_cache_.empty()) {
    dilated_cache_.resize(cubes.size());
    dilated_mass_cache_.assign(cubes.size(), 0.0);
  }
  auto& slot = dilated_cache_[cube_index];
  if (!slot) {
    const DyadicCube& q = cubes[cube_index];
    const int n = space->size();
    std::vector<char> in(n, 0);
    for (int i : q.members) in[i] = 1;
    std::vector<int> out;
    double mass = 0.0;
    for (int x = 0; x < n; ++x) {
      bool take = in[x];
      if (!take) {
        for (int i : q.members) {
          if (space->dist(x, i) <= q.side) {
            take = true;
            break;
          }
        }
      }
      if (take) {
        out.push_back(x);
        mass += space->measure(x);
      }
    }
    dilated_mass_cache_[cube_index] = mass;
    slot = std::move(out);
  }
  return *slot;
}

double DyadicSystem::dilated_mass(int cube_index) const {
  dilated_members(cube_index);
  return dilated_mass_cache_[cube_index];
}

double DyadicSystem::dilation_ratio_bound() const {
  double d = 1.0;
  for (const DyadicCube& q : cubes) {
    if (q.parent < 0) continue;
    d = std::max(d, dilated_mass(q.parent) / dilated_mass(q.index));
  }
  return d;
}

DyadicSystem build_shifted_dyadic(const Space& space,
                                  const Eigen::VectorXd& shift,
                                  std::pair<int, int> k_range) {
  if (space.side <= 0)
    throw std::invalid_argument(
        "build_shifted_dyadic: space must come from build_grid_space");
  if (shift.size() != space.dim)
    throw std::invalid_argument("build_shifted_dyadic: shift has wrong dimension");
  for (int j = 0; j < shift.size(); ++j)
    if (shift(j) < 0.0 || shift(j) >= 1.0)
      throw std::invalid_argument(
          "build_shifted_dyadic: shift outside [0,1) in coordinate " +
          std::to_string(j));
  const auto [k_min, k_max] = k_range;
  if (k_min > k_max)
    throw std::invalid_argument("build_shifted_dyadic: empty level range");
  if (k_min < 0)
    throw std::invalid_argument("build_shifted_dyadic: k_min must be >= 0");
  if (std::pow(0.5, k_max) < space.spacing * (1.0 - 1e-12))
    throw std::invalid_argument(
        "build_shifted_dyadic: k_max finer than the grid spacing");

  DyadicSystem sys;
  sys.space = &space;
  sys.k_min = k_min;
  sys.k_max = k_max;
  sys.shift = shift;
  const int n = space.size();
  const int dim = space.dim;
  sys.levels.resize(k_max - k_min + 1);
  sys.point_cube.assign(k_max - k_min + 1, std::vector<int>(n, -1));

  // Level-k boxes use the offset sigma_k = frac(2^k * shift) per axis; the
  // binary tail of the shift. Consecutive levels then share edges, which is
  // what makes the hierarchy nest.
  for (int k = k_min; k <= k_max; ++k) {
    const double w = std::pow(0.5, k);
    const std::int64_t cells = static_cast<std::int64_t>(std::round(1.0 / w));
    Eigen::VectorXd sigma(dim);
    for (int j = 0; j < dim; ++j) sigma(j) = frac(std::ldexp(shift(j), k));

    // box index per axis for each point
    std::map<std::vector<std::int64_t>, std::vector<int>> boxes;
    for (int p = 0; p < n; ++p) {
      std::vector<std::int64_t> key(dim);
      for (int j = 0; j < dim; ++j) {
        std::int64_t m = static_cast<std::int64_t>(
            std::floor(space.coords(p, j) / w - sigma(j) + 1e-12));
        if (space.boundary == Boundary::periodic)
          m = ((m % cells) + cells) % cells;
        key[j] = m;
      }
      boxes[key].push_back(p);
    }

    for (auto& [key, members] : boxes) {
      DyadicCube q;
      q.index = static_cast<int>(sys.cubes.size());
      q.level = k;
      q.side = w;
      q.members = members;
      std::sort(q.members.begin(), q.members.end());
      for (int p : q.members) q.mass += space.measure(p);
      q.center.resize(dim);
      for (int j = 0; j < dim; ++j) {
        double c = w * (static_cast<double>(key[j]) + sigma(j) + 0.5);
        if (space.boundary == Boundary::periodic) c = frac(c);
        q.center(j) = c;
      }
      double best = std::numeric_limits<double>::infinity();
      for (int p : q.members) {
        const double d = coord_distance(space, q.center, p);
        if (d < best) {
          best = d;
          q.center_point = p;
        }
      }
      sys.levels[k - k_min].push_back(q.index);
      for (int p : q.members) sys.point_cube[k - k_min][p] = q.index;
      sys.cubes.push_back(std::move(q));
    }
  }

  // Parent/child links through point membership.
  for (int k = k_min + 1; k <= k_max; ++k) {
    for (int ci : sys.levels[k - k_min]) {
      DyadicCube& q = sys.cubes[ci];
      const int parent = sys.point_cube[k - 1 - k_min][q.members.front()];
      for (int p : q.members) {
        if (sys.point_cube[k - 1 - k_min][p] != parent)
          throw std::runtime_error(
              "build_shifted_dyadic: level " + std::to_string(k) +
              " box straddles two parents; nesting broken");
      }
      q.parent = parent;
      sys.cubes[parent].children.push_back(ci);
    }
  }
  return sys;
}

AxiomReport verify_axioms(const DyadicSystem& sys) {
  AxiomReport rep;
  const Space& space = *sys.space;
  const int n = space.size();
  std::ostringstream w;

  // Nesting: parents one level up, members contained, children partition.
  for (const DyadicCube& q : sys.cubes) {
    if (q.level == sys.k_min) {
      if (q.parent != -1 && rep.nesting.pass) {
        rep.nesting.pass = false;
        rep.nesting.witness = "coarsest-level cube has a parent link";
      }
      continue;
    }
    if (q.parent < 0) {
      rep.nesting.pass = false;
      rep.nesting.witness = "cube " + std::to_string(q.index) + " has no parent";
      break;
    }
    const DyadicCube& p = sys.cubes[q.parent];
    if (p.level != q.level - 1) {
      rep.nesting.pass = false;
      rep.nesting.witness = "cube " + std::to_string(q.index) +
                            " parent is not one level coarser";
      break;
    }
    if (!std::includes(p.members.begin(), p.members.end(), q.members.begin(),
                       q.members.end())) {
      rep.nesting.pass = false;
      rep.nesting.witness = "cube " + std::to_string(q.index) +
                            " members not contained in parent " +
                            std::to_string(p.index);
      break;
    }
  }
  if (rep.nesting.pass) {
    for (const DyadicCube& p : sys.cubes) {
      if (p.level == sys.k_max) continue;
      std::size_t count = 0;
      for (int c : p.children) count += sys.cubes[c].members.size();
      if (count != p.members.size()) {
        rep.nesting.pass = false;
        rep.nesting.witness = "children of cube " + std::to_string(p.index) +
                              " do not partition it";
        break;
      }
    }
  }

  // Per-level disjointness and cover.
  for (int k = sys.k_min; k <= sys.k_max && (rep.disjoint.pass || rep.cover.pass);
       ++k) {
    std::vector<int> hits(n, 0);
    for (int ci : sys.levels[k - sys.k_min])
      for (int p : sys.cubes[ci].members) ++hits[p];
    for (int p = 0; p < n; ++p) {
      if (hits[p] > 1 && rep.disjoint.pass) {
        rep.disjoint.pass = false;
        rep.disjoint.witness = "point " + std::to_string(p) +
                               " in two cubes at level " + std::to_string(k);
      }
      if (hits[p] == 0 && rep.cover.pass) {
        rep.cover.pass = false;
        rep.cover.witness = "point " + std::to_string(p) +
                            " uncovered at level " + std::to_string(k);
      }
    }
  }

  // Ball sandwich with the system constants (open balls, geometric centers).
  double best_c1 = std::numeric_limits<double>::infinity();
  double best_C1 = 0.0;
  for (const DyadicCube& q : sys.cubes) {
    std::vector<char> member(n, 0);
    for (int p : q.members) member[p] = 1;
    double nearest_out = std::numeric_limits<double>::infinity();
    double farthest_in = 0.0;
    for (int p = 0; p < n; ++p) {
      const double d = coord_distance(space, q.center, p);
      if (member[p])
        farthest_in = std::max(farthest_in, d);
      else
        nearest_out = std::min(nearest_out, d);
    }
    best_c1 = std::min(best_c1, nearest_out / q.side);
    best_C1 = std::max(best_C1, farthest_in / q.side);
    if (rep.sandwich.pass) {
      if (nearest_out < sys.c1 * q.side) {
        rep.sandwich.pass = false;
        rep.sandwich.witness =
            "inner ball of cube " + std::to_string(q.index) +
            " leaks: non-member at distance " + std::to_string(nearest_out);
      } else if (farthest_in >= sys.C1 * q.side) {
        rep.sandwich.pass = false;
        rep.sandwich.witness =
            "outer ball of cube " + std::to_string(q.index) +
            " too small: member at distance " + std::to_string(farthest_in);
      }
    }
  }
  rep.best_c1 = std::isfinite(best_c1) ? best_c1 : 1.0;
  rep.best_C1 = best_C1;

  // Ancestor ball monotonicity: open C1-balls grow along ancestor chains.
  for (const DyadicCube& q : sys.cubes) {
    if (!rep.ancestor_balls.pass) break;
    int a = q.parent;
    while (a >= 0 && rep.ancestor_balls.pass) {
      const DyadicCube& anc = sys.cubes[a];
      for (int p = 0; p < n; ++p) {
        if (coord_distance(space, q.center, p) < sys.C1 * q.side &&
            coord_distance(space, anc.center, p) >= sys.C1 * anc.side) {
          rep.ancestor_balls.pass = false;
          rep.ancestor_balls.witness =
              "ball of cube " + std::to_string(q.index) +
              " not inside ball of ancestor " + std::to_string(anc.index) +
              " (point " + std::to_string(p) + ")";
          break;
        }
      }
      a = anc.parent;
    }
  }
  return rep;
}

LatticeEnsemble sample_ensemble(const Space& space, int M, std::uint64_t seed) {
  return sample_ensemble(space, M, seed, default_level_range(space));
}

LatticeEnsemble sample_ensemble(const Space& space, int M, std::uint64_t seed,
                                std::pair<int, int> k_range) {
  if (M < 1) throw std::invalid_argument("sample_ensemble: M must be >= 1");
  LatticeEnsemble ens;
  ens.space = &space;
  ens.seed = seed;
  ens.count = M;
  ens.systems.reserve(M);
  CounterRng rng(seed);
  for (int i = 0; i < M; ++i) {
    Eigen::VectorXd shift(space.dim);
    for (int j = 0; j < space.dim; ++j)
      shift(j) = rng.uniform(static_cast<std::uint64_t>(i) * space.dim + j);
    ens.systems.push_back(build_shifted_dyadic(space, shift, k_range));
  }
  return ens;
}

double boundary_hit_rate(const LatticeEnsemble& ensemble, int x, int k,
                         double eps) {
  if (eps < 0.0) throw std::invalid_argument("boundary_hit_rate: eps < 0");
  if (ensemble.systems.empty()) return 0.0;
  const Space& space = *ensemble.space;
  const int n = space.size();
  int hits = 0;
  for (const DyadicSystem& sys : ensemble.systems) {
    const DyadicCube& q = sys.cubes[sys.cube_at(k, x)];
    std::vector<char> in(n, 0);
    for (int p : q.members) in[p] = 1;
    double nearest_out = std::numeric_limits<double>::infinity();
    for (int p = 0; p < n; ++p)
      if (!in[p]) nearest_out = std::min(nearest_out, space.dist(x, p));
    if (nearest_out < eps) ++hits;
  }
  return static_cast<double>(hits) / ensemble.systems.size();
}

double annulus_ratio(const DyadicSystem& system, const DyadicCube& Q, double t) {
  if (Q.members.empty()) throw std::invalid_argument("annulus_ratio: empty cube");
  const Space& space = *system.space;
  const int n = space.size();
  std::vector<char> in(n, 0);
  for (int p : Q.members) in[p] = 1;
  double annulus_mass = 0.0;
  for (int x = 0; x < n; ++x) {
    if (in[x]) continue;
    double d = std::numeric_limits<double>::infinity();
    for (int p : Q.members) d = std::min(d, space.dist(x, p));
    if (d <= t * Q.side) annulus_mass += space.measure(x);
  }
  return annulus_mass / Q.mass;
}

GradedCheck verify_graded(const GradedSequence& seq) {
  GradedCheck check;
  const DyadicSystem& sys = *seq.system;
  const Space& space = *sys.space;
  const int n = space.size();
  std::ostringstream w;

  std::vector<int> prev_owner;  // point -> cube of previous generation, -1 outside
  for (std::size_t g = 0; g < seq.generations.size(); ++g) {
    std::vector<int> owner(n, -1);
    for (int ci : seq.generations[g]) {
      for (int p : sys.cubes[ci].members) {
        if (owner[p] != -1) {
          ++check.violations;
          if (check.ok) {
            check.ok = false;
            check.witness = "generation " + std::to_string(g) +
                            " cubes overlap at point " + std::to_string(p);
          }
        }
        owner[p] = ci;
      }
    }
    if (g > 0) {
      // each cube inside a single previous-generation cube
      for (int ci : seq.generations[g]) {
        const DyadicCube& q = sys.cubes[ci];
        const int host = prev_owner[q.members.front()];
        bool inside = host >= 0;
        for (int p : q.members) inside = inside && prev_owner[p] == host;
        if (!inside) {
          ++check.violations;
          if (check.ok) {
            check.ok = false;
            check.witness = "generation " + std::to_string(g) + " cube " +
                            std::to_string(ci) +
                            " not inside one previous-generation cube";
          }
        }
      }
      // mass grading against every previous-generation cube
      for (int ci : seq.generations[g - 1]) {
        const DyadicCube& q = sys.cubes[ci];
        double inter = 0.0;
        for (int p : q.members)
          if (owner[p] != -1) inter += space.measure(p);
        const double ratio = inter / q.mass;
        check.worst_ratio = std::max(check.worst_ratio, ratio);
        if (inter > seq.gamma * q.mass * (1.0 + 1e-12)) {
          ++check.violations;
          if (check.ok) {
            check.ok = false;
            check.witness = "generation " + std::to_string(g) +
                            " overfills cube " + std::to_string(ci) + ": " +
                            std::to_string(ratio) + " > gamma";
          }
        }
      }
    }
    prev_owner = std::move(owner);
  }
  return check;
}

}  // namespace bmol
