#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bmol/dyadic.hpp"
#include "bmol/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace bmol;

namespace {

Eigen::VectorXd shift1(double s) {
  Eigen::VectorXd v(1);
  v(0) = s;
  return v;
}

// Exact boundary-hit rate for a 1-D grid: the level-k offset is uniform and
// the hit indicator is constant between consecutive edge/grid crossings, so
// averaging one sample per cell integrates the indicator exactly.
double exact_hit_rate(const Space& space, int x, int k, double eps) {
  const int cells = space.side >> k;
  int hits = 0;
  for (int i = 0; i < cells; ++i) {
    const double sigma = (i + 0.5) / cells;
    const DyadicSystem sys =
        build_shifted_dyadic(space, shift1(sigma / (1 << k)), {k, k});
    const DyadicCube& q = sys.cubes[sys.cube_at(k, x)];
    double nearest = std::numeric_limits<double>::infinity();
    std::vector<char> in(space.size(), 0);
    for (int p : q.members) in[p] = 1;
    for (int p = 0; p < space.size(); ++p)
      if (!in[p]) nearest = std::min(nearest, space.dist(x, p));
    if (nearest < eps) ++hits;
  }
  return static_cast<double>(hits) / cells;
}

}  // namespace

TEST_CASE("unshifted level-1 split of the 8-point path") {
  const Space s = build_grid_space(1, 8, Boundary::reflecting);
  const DyadicSystem sys = build_shifted_dyadic(s, shift1(0.0), {0, 3});
  const auto& level1 = sys.levels[1];
  REQUIRE(level1.size() == 2);
  CHECK(sys.cubes[level1[0]].members == std::vector<int>{0, 1, 2, 3});
  CHECK(sys.cubes[level1[1]].members == std::vector<int>{4, 5, 6, 7});
}

TEST_CASE("fine level is an exact singleton partition") {
  const Space s = build_grid_space(1, 8, Boundary::reflecting);
  const DyadicSystem sys = build_shifted_dyadic(s, shift1(0.5 / 8.0), {0, 3});
  const auto& finest = sys.levels[3];
  CHECK(finest.size() == 8);
  std::set<int> seen;
  for (int ci : finest) {
    REQUIRE(sys.cubes[ci].members.size() == 1);
    seen.insert(sys.cubes[ci].members[0]);
  }
  CHECK(seen.size() == 8);
}

TEST_CASE("shift outside the unit cell is rejected") {
  const Space s = build_grid_space(1, 8, Boundary::reflecting);
  CHECK_THROWS_AS(build_shifted_dyadic(s, shift1(1.0), {0, 3}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_shifted_dyadic(s, shift1(-0.25), {0, 3}),
                  std::invalid_argument);
}

TEST_CASE("axioms pass for a dense sweep of shifts on the 64-point path") {
  const Space s = build_grid_space(1, 64, Boundary::reflecting);
  for (int i = 0; i < 128; ++i) {
    const double shift = (i + 0.37) / 128.0;
    const DyadicSystem sys = build_shifted_dyadic(s, shift1(shift), {0, 6});
    const AxiomReport rep = verify_axioms(sys);
    CAPTURE(shift);
    CAPTURE(rep.nesting.witness);
    CAPTURE(rep.sandwich.witness);
    CAPTURE(rep.ancestor_balls.witness);
    REQUIRE(rep.all_pass());
    CHECK(rep.best_c1 >= 0.25);
    CHECK(rep.best_C1 < 2.0);
  }
}

TEST_CASE("axioms pass on periodic and 2-D grids") {
  const Space p = build_grid_space(1, 64, Boundary::periodic);
  CHECK(verify_axioms(build_shifted_dyadic(p, shift1(0.613), {0, 6})).all_pass());
  const Space g = build_grid_space(2, 16, Boundary::reflecting);
  Eigen::VectorXd sh(2);
  sh << 0.2718, 0.5772;
  CHECK(verify_axioms(build_shifted_dyadic(g, sh, {0, 4})).all_pass());
}

TEST_CASE("corrupted parent link is caught with a witness") {
  const Space s = build_grid_space(1, 16, Boundary::reflecting);
  DyadicSystem sys = build_shifted_dyadic(s, shift1(0.0), {0, 4});
  const int victim = sys.levels[2][0];
  const int wrong = sys.levels[1][1];
  sys.cubes[victim].parent = wrong;
  const AxiomReport rep = verify_axioms(sys);
  CHECK_FALSE(rep.nesting.pass);
  CHECK_FALSE(rep.nesting.witness.empty());
}

TEST_CASE("single-level system passes vacuously") {
  const Space s = build_grid_space(1, 16, Boundary::reflecting);
  const DyadicSystem sys = build_shifted_dyadic(s, shift1(0.3), {2, 2});
  const AxiomReport rep = verify_axioms(sys);
  CHECK(rep.all_pass());
}

TEST_CASE("dilated cubes nest along parent links") {
  const Space s = build_grid_space(1, 32, Boundary::reflecting);
  const DyadicSystem sys = build_shifted_dyadic(s, shift1(0.41), {0, 5});
  for (const DyadicCube& q : sys.cubes) {
    if (q.parent < 0) continue;
    const auto& child = sys.dilated_members(q.index);
    const auto& parent = sys.dilated_members(q.parent);
    CHECK(std::includes(parent.begin(), parent.end(), child.begin(),
                        child.end()));
  }
  CHECK(sys.dilation_ratio_bound() >= 1.0);
}

TEST_CASE("ensemble of one equals the directly built system") {
  const Space s = build_grid_space(1, 64, Boundary::reflecting);
  const LatticeEnsemble ens = sample_ensemble(s, 1, 42);
  REQUIRE(ens.systems.size() == 1);
  const DyadicSystem direct =
      build_shifted_dyadic(s, ens.systems[0].shift, default_level_range(s));
  REQUIRE(direct.cubes.size() == ens.systems[0].cubes.size());
  for (std::size_t i = 0; i < direct.cubes.size(); ++i)
    CHECK(direct.cubes[i].members == ens.systems[0].cubes[i].members);
}

TEST_CASE("different seeds draw different shift multisets") {
  const Space s = build_grid_space(1, 16, Boundary::reflecting);
  const LatticeEnsemble a = sample_ensemble(s, 200, 1);
  const LatticeEnsemble b = sample_ensemble(s, 200, 2);
  std::multiset<double> sa, sb;
  for (const auto& sys : a.systems) sa.insert(sys.shift(0));
  for (const auto& sys : b.systems) sb.insert(sys.shift(0));
  CHECK(sa != sb);
  const LatticeEnsemble a2 = sample_ensemble(s, 200, 1);
  std::multiset<double> sa2;
  for (const auto& sys : a2.systems) sa2.insert(sys.shift(0));
  CHECK(sa == sa2);
}

TEST_CASE("boundary hit rate: zero eps, monotonicity, exact rate") {
  const Space s = build_grid_space(1, 256, Boundary::reflecting);
  const LatticeEnsemble ens = sample_ensemble(s, 400, 7);
  const int x = 128;
  const int k = 4;
  const double w = std::pow(0.5, k);

  CHECK(boundary_hit_rate(ens, x, k, 0.0) == 0.0);

  double prev = 0.0;
  for (double eps : {w / 16, w / 8, w / 4, w / 2}) {
    const double rate = boundary_hit_rate(ens, x, k, eps);
    CHECK(rate >= prev);
    prev = rate;
  }

  const double rate = boundary_hit_rate(ens, x, k, w / 8);
  CHECK(rate <= 0.5);
  const double exact = exact_hit_rate(s, x, k, w / 8);
  CHECK(std::abs(rate - exact) <=
        3.0 * std::sqrt(exact * (1.0 - exact) / 400.0) + 0.01);

  const double r1 = exact_hit_rate(s, x, k, w / 8);
  const double r2 = exact_hit_rate(s, x, k, w / 4);
  const double r3 = exact_hit_rate(s, x, k, w / 2);
  const double slope1 = std::log2(r2 / r1);
  const double slope2 = std::log2(r3 / r2);
  CHECK(0.5 * (slope1 + slope2) >= 0.8);
}

TEST_CASE("annulus ratios: empty, direct count, global eta bound") {
  const Space s16 = build_grid_space(1, 16, Boundary::reflecting);
  const DyadicSystem sys16 = build_shifted_dyadic(s16, shift1(0.0), {0, 4});

  const int mid = sys16.cube_at(2, 5);
  CHECK(sys16.cubes[mid].members == std::vector<int>{4, 5, 6, 7});
  CHECK(annulus_ratio(sys16, sys16.cubes[mid], 1.0) == doctest::Approx(2.0));

  const int half = sys16.cube_at(1, 2);
  CHECK(annulus_ratio(sys16, sys16.cubes[half], 0.05) == 0.0);

  const Space s = build_grid_space(1, 64, Boundary::reflecting);
  const DyadicSystem sys = build_shifted_dyadic(s, shift1(0.0), {0, 6});
  for (const DyadicCube& q : sys.cubes)
    for (double t : {0.25, 0.5, 1.0}) {
      const double ratio = annulus_ratio(sys, q, t);
      CHECK(ratio <= 4.0 * std::pow(t, 0.8) * (1.0 + 1e-12));
    }
}

TEST_CASE("graded sequence verification") {
  const Space s = build_grid_space(1, 64, Boundary::reflecting);
  const DyadicSystem sys = build_shifted_dyadic(s, shift1(0.0), {0, 6});

  GradedSequence seq;
  seq.system = &sys;
  seq.gamma = 0.5;
  seq.generations.push_back({sys.cube_at(1, 0)});
  seq.generations.push_back({sys.cube_at(2, 0)});
  seq.generations.push_back({sys.cube_at(4, 0)});
  const GradedCheck ok = verify_graded(seq);
  CHECK(ok.ok);
  CHECK(ok.worst_ratio == doctest::Approx(0.5));

  GradedSequence bad = seq;
  bad.gamma = 0.25;
  const GradedCheck fail = verify_graded(bad);
  CHECK_FALSE(fail.ok);
  CHECK(fail.violations > 0);
  CHECK_FALSE(fail.witness.empty());

  GradedSequence stray = seq;
  stray.generations[2] = {sys.cube_at(4, 40)};
  CHECK_FALSE(verify_graded(stray).ok);
}
