#pragma once

#include "bmol/decompose.hpp"
#include "bmol/dyadic.hpp"
#include "bmol/semigroup.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace bmol {

/// Weighted point masses on X x {scales}; the scale t of an atom is theta
/// times the side of the dyadic cubes that produced it.
struct CarlesonAtom {
  int point = -1;
  double scale = 0.0;   // t > 0
  double weight = 0.0;  // signed
};

struct CarlesonMeasure {
  std::vector<CarlesonAtom> atoms;  // deduplicated by (point, scale)
  double total() const;
  bool empty() const { return atoms.empty(); }
};

/// Union with weight addition on matching (point, scale) pairs.
CarlesonMeasure merge(const CarlesonMeasure& a, const CarlesonMeasure& b);

/// max over balls of sigma(B-hat)/mu(B), B-hat = {(y,t): y in B, t < r_B}.
double carleson_norm(const CarlesonMeasure& sigma, const std::vector<Ball>& balls);

/// x -> sum of w * K_{t^2}(x,y) over atoms, the balayage of sigma.
Eigen::VectorXd sweep(const Operator& op, const CarlesonMeasure& sigma);

struct BalayageOptions {
  double c0 = 2.0;       // lambda = eps = c0 * ||f||_BMO_L
  double bucket_A = 8.0; // scale-regime boundary for diagnostics
  const SpaceAnalysis* analysis = nullptr;
};

struct BalayageResult {
  Eigen::VectorXd g;
  CarlesonMeasure sigma;
  Eigen::VectorXd remainder;
  double input_bmo = 0.0;
  double remainder_bmo = 0.0;
  double contraction = 0.0;  // remainder_bmo / input_bmo
  double lambda = 0.0;
  double identity_residual = 0.0;  // ||f - g - sweep - remainder||_inf
  std::map<double, double> scale_sup;  // per cube side: sup |f_side|
  // sup norms of the unsmoothed parts, bucketed by scale regime
  double bucket_fine = 0.0, bucket_mid = 0.0, bucket_coarse = 0.0;
};

/// One pass of the graded-measure construction: f = g + sweep(sigma) +
/// remainder, with sigma living on the slices t = theta * side.
BalayageResult balayage_build(const Operator& op, const Eigen::VectorXd& f,
                              const LatticeEnsemble& ensemble, double theta,
                              const BalayageOptions& options = {});

struct IterationRow {
  int iteration = 0;
  double g_inf = 0.0;
  double sigma_norm = 0.0;
  double contraction = 0.0;
  double remainder_bmo = 0.0;
  double bucket_fine = 0.0, bucket_mid = 0.0, bucket_coarse = 0.0;
};

struct IterationResult {
  Eigen::VectorXd g_total;
  CarlesonMeasure sigma_total;
  Eigen::VectorXd remainder;
  std::vector<IterationRow> history;
  double identity_residual = 0.0;
  double final_certificate = 0.0;  // ||g_total||_inf + ||sigma_total||_C
};

/// Applies balayage_build to successive remainders, accumulating g and sigma.
/// Stops on contraction failing rho_target twice, on a negligible remainder,
/// or after max_iter rounds. A first-round contraction >= 1 is an error
/// suggesting theta/2.
IterationResult iterate_balayage(const Operator& op, const Eigen::VectorXd& f,
                                 const LatticeEnsemble& ensemble, double theta,
                                 int max_iter, double rho_target,
                                 const BalayageOptions& options = {});

}  // namespace bmol
