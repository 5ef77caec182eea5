#pragma once

#include "bmol/bmo.hpp"
#include "bmol/dyadic.hpp"
#include "bmol/semigroup.hpp"
#include "bmol/space.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace bmol {

/// Ball family plus doubling fit, computed once per space and threaded
/// through the pipelines.
struct SpaceAnalysis {
  std::vector<Ball> balls;
  DoublingFit fit;
};

SpaceAnalysis analyze_space(const Space& space, int radii_per_octave = 2);

/// Mean of |f - e^{-l(Q)^2 L} f| over the dilated cube 2Q.
double dilated_oscillation_average(const Operator& op, const Eigen::VectorXd& f,
                                   const DyadicSystem& system, int cube);

struct SelectedCube {
  int cube = -1;            // system cube index
  int star = -1;            // previous-generation host Q*
  double window_avg = 0.0;  // avg_{2Q} |f - e^{-l(Q*)^2 L} f| at selection
};

/// Output of the stopping-time construction on one root cube.
struct StoppingForest {
  const DyadicSystem* system = nullptr;
  const Operator* op = nullptr;
  int root = -1;
  double lambda = 0.0;
  Eigen::VectorXd f;
  std::vector<std::vector<SelectedCube>> generations;  // nonempty, 1-based idea
  std::vector<Eigen::VectorXd> heat_by_level;          // e^{-l(k)^2 L} f
  Eigen::VectorXd g_part;

  double window_D = 1.0;       // mu(2Q~)/mu(2Q) bound from the system
  int window_violations = 0;   // selected cubes outside (lambda, D*lambda]
  int entry_violations = 0;    // recursion roots whose own average exceeds lambda
  int pointwise_exceptions = 0;  // residual points with oscillation > lambda

  const Eigen::VectorXd& heat_at_level(int level) const;
  /// a_Q = e^{-l(Q)^2 L} f - e^{-l(Q*)^2 L} f as a global vector.
  Eigen::VectorXd coefficient(const SelectedCube& sel) const;
  Eigen::VectorXd h_part() const;
  /// (f - e^{-l(Q0)^2 L} f) chi_{Q0}.
  Eigen::VectorXd target() const;
  double reconstruction_residual() const;
  int selected_count() const;
};

/// Calderon-Zygmund style recursive selection of maximal dyadic subcubes whose
/// dilated averages exceed lambda. Requires the entry condition at the root.
StoppingForest stopping_time(const Operator& op, const Eigen::VectorXd& f,
                             const DyadicSystem& system, int root_cube,
                             double lambda);

struct CoefficientReport {
  struct Row {
    int generation = 0;
    double c_size = 0.0;    // max |a_Q|/lambda on 2Q
    double c_smooth = 0.0;  // max |L a_Q| l(Q)^2/lambda on 2Q
    double c_holder = 0.0;  // short-time increment constant
    double c_int_m0 = 0.0;  // kernel integral against |a_Q|
    double c_int_m1 = 0.0;  // kernel integral against |l(Q)^2 L a_Q|
  };
  std::vector<Row> rows;
  double c_size = 0.0, c_smooth = 0.0, c_holder = 0.0, c_int_m0 = 0.0,
         c_int_m1 = 0.0;
};

CoefficientReport coefficient_checks(const StoppingForest& forest,
                                     const Operator& op);

/// Per generation k, max over previous-generation cubes Q* of
/// mu(E_k cap Q*)/mu(Q*); the measured grading ratios gamma_k.
std::vector<double> generation_mass_ratios(const StoppingForest& forest);

/// Half-graded refinement of the stopping generations by interpolating
/// ancestor families (m slots per generation).
struct RefinedGrading {
  GradedSequence flat;  // the full half-graded chain, coarse to fine
  int m = 1;
  int decrements = 0;          // times m was lowered to restore the top step
  int lower_bound_misses = 0;  // chosen ancestors below the mass floor
  int grading_violations = 0;  // ratios > 1/2 that no m can repair
  double n_D = 0.0;
  // slot_families[k-1][i-1): cube indices of the slot-(k,i) family, i = 1..m;
  // slot i = m is the original generation k.
  std::vector<std::vector<std::vector<int>>> slot_families;
};

RefinedGrading graded_refine(const StoppingForest& forest, double eps_prime,
                             double n_D);
/// Convenience overload computing the doubling exponent internally.
RefinedGrading graded_refine(const StoppingForest& forest, double eps_prime);

/// Averaged decomposition on one root cube: target = g'' + g''' + h with h
/// supported on the refined half-graded families.
struct AveragedDecomposition {
  StoppingForest forest;
  RefinedGrading grading;
  Eigen::VectorXd g;  // g'' + g'''
  Eigen::VectorXd h;
  double g2_inf = 0.0;
  double g3_inf = 0.0;
  double reconstruction_residual = 0.0;
  int m = 1;
};

AveragedDecomposition averaged_decompose(const Operator& op,
                                         const Eigen::VectorXd& f,
                                         const DyadicSystem& system,
                                         int root_cube, double lambda,
                                         double eps,
                                         const SpaceAnalysis* analysis = nullptr);

struct Decomposition {
  Eigen::VectorXd g;
  Eigen::VectorXd h;
  double epsilon = 0.0;
  double lambda = 0.0;
  double lambda0 = 0.0;
  double g_inf = 0.0;
  double h_bmo = 0.0;
  double A1_measured = 0.0;  // g_inf / lambda0
  double A2_measured = 0.0;  // h_bmo / epsilon
  int window_violations = 0;
  int entry_violations = 0;
};

/// Ensemble-averaged decomposition f = g + h run over every member lattice
/// from its coarsest cubes.
Decomposition global_decompose(const Operator& op, const Eigen::VectorXd& f,
                               const LatticeEnsemble& ensemble, double eps,
                               const SpaceAnalysis* analysis = nullptr);

}  // namespace bmol
