#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bmol/rng.hpp"
#include "bmol/semigroup.hpp"
#include "bmol/space.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

using namespace bmol;

namespace {

Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::VectorXd f(n);
  for (int i = 0; i < n; ++i) f(i) = 2.0 * rng.uniform(i) - 1.0;
  return f;
}

}  // namespace

TEST_CASE("reflecting laplacian is conservative with a flat null vector") {
  const Space s = build_grid_space(1, 16, Boundary::reflecting);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  CHECK(op.conservative());
  CHECK(op.eigenvalues().minCoeff() == 0.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.size());
  for (double t : {0.01, 0.5, 3.0})
    CHECK((op.heat_apply(t, ones) - ones).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("periodic laplacian spectrum matches the circulant closed form") {
  const Space s = build_grid_space(1, 8, Boundary::periodic);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  const double inv_h2 = 1.0 / (s.spacing * s.spacing);
  std::vector<double> expected;
  for (int j = 0; j < 8; ++j)
    expected.push_back((2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * j / 8.0)) *
                       inv_h2);
  std::sort(expected.begin(), expected.end());
  for (int j = 0; j < 8; ++j)
    CHECK(op.eigenvalues()(j) ==
          doctest::Approx(expected[j]).epsilon(1e-10).scale(inv_h2));
}

TEST_CASE("constant potential shifts the semigroup exactly") {
  const Space s = build_grid_space(1, 12, Boundary::reflecting);
  OperatorParams params;
  const double v = 3.25;
  params.potential = Eigen::VectorXd::Constant(s.size(), v);
  const Operator op = build_operator(s, OperatorKind::schrodinger, params);
  CHECK_FALSE(op.conservative());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.size());
  for (double t : {0.05, 0.7}) {
    const Eigen::VectorXd got = op.heat_apply(t, ones);
    CHECK((got - std::exp(-t * v) * ones).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("schrodinger rejects negative potentials, bessel checks its inputs") {
  const Space s = build_grid_space(1, 8, Boundary::reflecting);
  OperatorParams params;
  params.potential = Eigen::VectorXd::Constant(s.size(), -1.0);
  CHECK_THROWS_AS(build_operator(s, OperatorKind::schrodinger, params),
                  std::invalid_argument);
  OperatorParams bad_b;
  bad_b.lambda_b = 0.0;
  CHECK_THROWS_AS(build_operator(s, OperatorKind::bessel, bad_b),
                  std::invalid_argument);
  const Space s2 = build_grid_space(2, 4, Boundary::reflecting);
  CHECK_THROWS_AS(build_operator(s2, OperatorKind::bessel, OperatorParams{}),
                  std::invalid_argument);
}

TEST_CASE("bessel operator is positive semidefinite for both index regimes") {
  const Space s = build_grid_space(1, 32, Boundary::reflecting);
  for (double lb : {1.5, 0.6}) {
    OperatorParams params;
    params.lambda_b = lb;
    const Operator op = build_operator(s, OperatorKind::bessel, params);
    CHECK(op.eigenvalues().minCoeff() >= 0.0);
    CHECK_FALSE(op.conservative());
  }
}

TEST_CASE("heat at time zero is the identity, semigroup law holds") {
  const Space s = build_grid_space(2, 6, Boundary::periodic);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  const Eigen::VectorXd f = random_vector(s.size(), 11);
  CHECK(op.heat_apply(0.0, f) == f);
  for (auto [t1, t2] : {std::pair{0.02, 0.07}, {0.3, 0.11}}) {
    const Eigen::VectorXd two_step = op.heat_apply(t1, op.heat_apply(t2, f));
    const Eigen::VectorXd one_step = op.heat_apply(t1 + t2, f);
    CHECK((two_step - one_step).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("spectral heat application matches a direct matrix exponential") {
  const Space s = build_grid_space(1, 24, Boundary::reflecting);
  OperatorParams params;
  params.potential = random_vector(s.size(), 3).cwiseAbs();
  const Operator op = build_operator(s, OperatorKind::schrodinger, params);
  const Eigen::VectorXd f = random_vector(s.size(), 4);
  for (double t : {0.01, 0.4}) {
    const Eigen::MatrixXd direct = (-t * op.matrix()).exp();
    CHECK((op.heat_apply(t, f) - direct * f).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("kernel density: symmetry, conservation, positivity") {
  const Space s = build_grid_space(1, 20, Boundary::reflecting);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  for (double t : {s.spacing * s.spacing, 0.1, 1.0}) {
    const Eigen::MatrixXd& K = op.heat_kernel(t);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::VectorXd rows = K * s.measure;
    CHECK((rows - Eigen::VectorXd::Ones(s.size())).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK(K.minCoeff() >= -1e-10);
  }
}

TEST_CASE("spectral mapping on eigenvectors") {
  const Space s = build_grid_space(1, 16, Boundary::periodic);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  for (int j : {0, 3, 15}) {
    const Eigen::VectorXd v = op.eigenvectors().col(j);
    const double lam = op.eigenvalues()(j);
    const Eigen::VectorXd got = op.heat_apply(0.2, v);
    CHECK((got - std::exp(-0.2 * lam) * v).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("nonnegative potentials only damp the kernel") {
  const Space s = build_grid_space(1, 16, Boundary::reflecting);
  const Operator base = build_operator(s, OperatorKind::laplacian);
  OperatorParams params;
  params.potential = random_vector(s.size(), 9).cwiseAbs() * 4.0;
  const Operator damped = build_operator(s, OperatorKind::schrodinger, params);
  for (double t : {0.05, 0.4, 1.5}) {
    const Eigen::MatrixXd& k0 = base.heat_kernel(t);
    const Eigen::MatrixXd& kv = damped.heat_kernel(t);
    CHECK(kv.minCoeff() >= -1e-10);
    CHECK((k0 - kv).minCoeff() >= -1e-10);  // domination entrywise
  }
}

TEST_CASE("gaussian fit at the diameter scale and over the dyadic grid") {
  const Space s = build_grid_space(1, 256, Boundary::reflecting);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  const double d2 = s.diameter() * s.diameter();
  const GaussianFit top = gaussian_fit(op, {d2});
  CHECK(top.max_violation <= 0.0);
  CHECK(top.C <= 2.0);

  const GaussianFit full = gaussian_fit(op, dyadic_time_grid(s));
  CHECK(full.max_violation <= 0.0);
  CHECK(full.C <= 10.0);
  CHECK(full.c <= 16.0);
}

TEST_CASE("gaussian fit rejects times outside the discretization window") {
  const Space s = build_grid_space(1, 32, Boundary::reflecting);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  const double floor_t = s.spacing * s.spacing;
  CHECK_THROWS_AS(gaussian_fit(op, {floor_t / 10.0}), std::invalid_argument);
}

TEST_CASE("drift bounds vanish for K = 1 and for conserved constants") {
  const Space s = build_grid_space(1, 32, Boundary::reflecting);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  const Eigen::VectorXd f = random_vector(s.size(), 21);
  auto [d0, d1] = drift_bound(op, f, 0.1, 1.0);
  CHECK(d0 == 0.0);
  CHECK(d1 == 0.0);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.size());
  for (double K : {2.0, 64.0, 1024.0}) {
    auto [c0, c1] = drift_bound(op, ones, 0.05, K);
    CHECK(c0 <= 1e-10);
    CHECK(c1 <= 1e-10);
  }
}

TEST_CASE("drift grows at most logarithmically over the K sweep") {
  const Space s = build_grid_space(1, 64, Boundary::reflecting);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  Eigen::VectorXd f(s.size());
  for (int i = 0; i < s.size(); ++i)
    f(i) = std::log(1.0 / (s.dist(i, 32) + s.spacing));
  double worst0 = 0.0, worst1 = 0.0;
  for (double K = 2.0; K <= 1024.0; K *= 2.0) {
    auto [d0, d1] = drift_bound(op, f, s.spacing * s.spacing, K);
    worst0 = std::max(worst0, d0 / (1.0 + std::log(K)));
    worst1 = std::max(worst1, d1);
  }
  CHECK(worst0 > 0.0);
  CHECK(std::isfinite(worst0));
  CHECK(std::isfinite(worst1));
}

TEST_CASE("time-derivative kernel admits the scaled envelope") {
  const Space s = build_grid_space(1, 256, Boundary::reflecting);
  const Operator op = build_operator(s, OperatorKind::laplacian);
  const DerivativeFit fit = time_derivative_check(op, dyadic_time_grid(s));
  CHECK(fit.max_violation <= 0.0);
  CHECK(fit.C1 <= 50.0);

  // large time: the derivative kernel is spectrally tiny
  const double d2 = s.diameter() * s.diameter();
  const DerivativeFit top = time_derivative_check(op, {d2});
  CHECK(top.C1 <= 1.0);
}
