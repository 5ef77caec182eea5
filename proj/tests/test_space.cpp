#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bmol/space.hpp"

#include <cmath>
#include <set>

using namespace bmol;

namespace {

// all-pairs doubling exponent, independent of the fit's internals
double brute_force_exponent(const Space& space, const std::vector<Ball>& balls) {
  double worst = 0.0;
  for (const Ball& b : balls)
    for (double lam : {2.0, 4.0, 8.0}) {
      const double ratio = space.ball_mass(b.center, lam * b.radius) / b.mass;
      if (ratio > 1.0) worst = std::max(worst, std::log(ratio) / std::log(lam));
    }
  return worst;
}

Space single_point_space() {
  Space s;
  s.dim = 1;
  s.coords = Eigen::MatrixXd::Zero(1, 1);
  s.dist = Eigen::MatrixXd::Zero(1, 1);
  s.measure = Eigen::VectorXd::Constant(1, 1.0);
  s.spacing = 0.0;
  return s;
}

}  // namespace

TEST_CASE("grid space basic layout") {
  const Space s = build_grid_space(1, 4, Boundary::reflecting);
  CHECK(s.size() == 4);
  CHECK(s.spacing == doctest::Approx(0.25));
  for (int i = 0; i < 4; ++i) {
    CHECK(s.coords(i, 0) == doctest::Approx(i * 0.25));
    CHECK(s.measure(i) == doctest::Approx(0.25));
  }
  validate_space(s);
}

TEST_CASE("periodic wraparound distance") {
  const Space s = build_grid_space(1, 2, Boundary::periodic);
  CHECK(s.dist(0, 1) == doctest::Approx(0.5));
  const Space p8 = build_grid_space(1, 8, Boundary::periodic);
  CHECK(p8.dist(0, 7) == doctest::Approx(1.0 / 8.0));
  validate_space(p8);
}

TEST_CASE("size limit is enforced with the explicit limit") {
  CHECK_THROWS_WITH_AS(build_grid_space(2, 300, Boundary::reflecting),
                       doctest::Contains("65536"), std::invalid_argument);
  CHECK_THROWS_AS(build_grid_space(1, 1, Boundary::reflecting),
                  std::invalid_argument);
}

TEST_CASE("triangle inequality holds on 2-D periodic grids") {
  const Space s = build_grid_space(2, 8, Boundary::periodic);
  validate_space(s);  // full O(N^3) scan at this size
}

TEST_CASE("ball enumeration on the 4-point path") {
  const Space s = build_grid_space(1, 4, Boundary::reflecting);
  const auto balls = enumerate_balls(s, 1);
  bool has_quarter = false, has_full = false;
  for (const Ball& b : balls) {
    if (b.radius == doctest::Approx(0.25))
      has_quarter = has_quarter || (b.members.size() >= 2 && b.members.size() <= 3);
    if (b.members.size() == 4) has_full = true;
  }
  CHECK(has_quarter);
  CHECK(has_full);
}

TEST_CASE("single point space yields one ball covering everything") {
  const Space s = single_point_space();
  const auto balls = enumerate_balls(s, 1);
  REQUIRE(balls.size() == 1);
  CHECK(balls[0].members == std::vector<int>{0});
  CHECK(balls[0].mass == doctest::Approx(1.0));
}

TEST_CASE("ball count bound and distinct member sets on the 256-point path") {
  const Space s = build_grid_space(1, 256, Boundary::reflecting);
  const auto balls = enumerate_balls(s, 2);
  CHECK(balls.size() <= 256 * (2 * 8 + 2));
  std::set<std::vector<int>> sets;
  for (const Ball& b : balls) sets.insert(b.members);
  CHECK(sets.size() == balls.size());
}

TEST_CASE("ball monotonicity in the radius") {
  const Space s = build_grid_space(2, 8, Boundary::reflecting);
  for (int c : {0, 20, 63}) {
    std::vector<int> prev;
    for (double r = s.spacing; r <= 1.5; r *= 1.4) {
      const auto cur = s.ball_members(c, r);
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST_CASE("doubling fit on the uniform path") {
  const Space s = build_grid_space(1, 256, Boundary::reflecting);
  const auto balls = enumerate_balls(s, 2);
  const DoublingFit fit = doubling_fit(s, balls);
  CHECK(fit.n_D >= 0.9);
  CHECK(fit.n_D <= 1.3);
  CHECK(fit.n_D >= brute_force_exponent(s, balls));
  CHECK(doubling_violations(s, balls, fit) == 0);
}

TEST_CASE("doubling fit on the 16x16 grid") {
  const Space s = build_grid_space(2, 16, Boundary::reflecting);
  const auto balls = enumerate_balls(s, 2);
  const DoublingFit fit = doubling_fit(s, balls);
  CHECK(fit.n_D >= 1.5);
  CHECK(fit.n_D <= 2.5);
  CHECK(fit.n_D >= 1.8);  // exhaustive ratio maximization lands near dim
  CHECK(fit.n_D <= 2.4);
  CHECK(doubling_violations(s, balls, fit) == 0);
}

TEST_CASE("doubling fit degenerates cleanly on one point") {
  const Space s = single_point_space();
  const auto balls = enumerate_balls(s, 1);
  const DoublingFit fit = doubling_fit(s, balls);
  CHECK(fit.C_D == doctest::Approx(1.0));
  CHECK(fit.n_D == doctest::Approx(0.0));
}
