#pragma once

#include "bmol/semigroup.hpp"
#include "bmol/space.hpp"

#include <Eigen/Dense>

#include <vector>

namespace bmol {

/// Oscillation |f - e^{-r^2 L} f| with the semigroup time clamped below by
/// spacing^2 (the discretization floor of the kernel bound).
Eigen::VectorXd semigroup_oscillation(const Operator& op,
                                      const Eigen::VectorXd& f, double radius);

/// sup over the given balls of the mean oscillation (1/mu(B)) int_B
/// |f - e^{-r_B^2 L} f| dmu, with the attaining ball.
std::pair<double, Ball> bmo_norm(const Operator& op, const Eigen::VectorXd& f,
                                 const std::vector<Ball>& balls);

/// sup over balls of mu{x in B : |f - e^{-r_B^2 L} f| > lambda} / mu(B).
double jn_tail(const Operator& op, const Eigen::VectorXd& f,
               const std::vector<Ball>& balls, double lambda);

struct TailCurve {
  std::vector<double> lambdas;
  std::vector<double> tails;
};

/// Tail sampled on a scale-covariant grid: lambda_j = lambda_min * g_j with a
/// fixed dimensionless ladder g, so the curve commutes with f -> s f.
TailCurve tail_curve(const Operator& op, const Eigen::VectorXd& f,
                     const std::vector<Ball>& balls, double lambda_min,
                     int points = 40);

struct JnReport {
  double norm = 0.0;
  Ball witness;
  double epsilon = 0.0;  // exponential tail rate epsilon_L(f)
  double lambda0 = 0.0;  // threshold 2*||f||_BMO_L below which the tail is free
  TailCurve curve;
};

/// epsilon_L(f) = max over grid lambdas >= lambda0 with tail > 0 of
/// lambda / ln(1/tail); the exact infimum of rates valid on the grid.
std::pair<double, double> epsilon_L(const Operator& op, const Eigen::VectorXd& f,
                                    const std::vector<Ball>& balls);

JnReport jn_report(const Operator& op, const Eigen::VectorXd& f,
                   const std::vector<Ball>& balls);

/// Upper bound on dist(f, L^inf): min over truncation levels
/// M in {i/64 : i=0..63} * ||f||_inf of ||f - clamp(f,-M,M)||_BMO_L, plus any
/// supplied candidate g. Returns (bound, best truncation level).
std::pair<double, double> dist_upper(const Operator& op,
                                     const Eigen::VectorXd& f,
                                     const std::vector<Ball>& balls,
                                     const Eigen::VectorXd* candidate_g = nullptr);

}  // namespace bmol
