#include "bmol/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmol {

double CarlesonMeasure::total() const {
  double s = 0.0;
  for (const CarlesonAtom& a : atoms) s += std::abs(a.weight);
  return s;
}

CarlesonMeasure merge(const CarlesonMeasure& a, const CarlesonMeasure& b) {
  std::map<std::pair<double, int>, double> acc;
  for (const CarlesonAtom& atom : a.atoms)
    acc[{atom.scale, atom.point}] += atom.weight;
  for (const CarlesonAtom& atom : b.atoms)
    acc[{atom.scale, atom.point}] += atom.weight;
  CarlesonMeasure out;
  for (const auto& [key, w] : acc)
    out.atoms.push_back({key.second, key.first, w});
  return out;
}

double carleson_norm(const CarlesonMeasure& sigma,
                     const std::vector<Ball>& balls) {
  if (balls.empty()) throw std::invalid_argument("carleson_norm: no balls");
  double worst = 0.0;
  for (const Ball& b : balls) {
    double box = 0.0;
    for (const CarlesonAtom& atom : sigma.atoms) {
      if (atom.scale >= b.radius) continue;
      if (std::binary_search(b.members.begin(), b.members.end(), atom.point))
        box += std::abs(atom.weight);
    }
    worst = std::max(worst, box / b.mass);
  }
  return worst;
}

Eigen::VectorXd sweep(const Operator& op, const CarlesonMeasure& sigma) {
  const int n = op.space().size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  std::map<double, Eigen::VectorXd> by_scale;
  for (const CarlesonAtom& atom : sigma.atoms) {
    auto [it, fresh] = by_scale.try_emplace(atom.scale, Eigen::VectorXd::Zero(n));
    it->second(atom.point) += atom.weight;
  }
  for (const auto& [t, w] : by_scale) out += op.heat_kernel(t * t) * w;
  return out;
}

BalayageResult balayage_build(const Operator& op, const Eigen::VectorXd& f,
                              const LatticeEnsemble& ensemble, double theta,
                              const BalayageOptions& options) {
  if (theta <= 0.0 || theta >= 1.0)
    throw std::invalid_argument("balayage_build: theta must be in (0,1)");
  const Space& space = *ensemble.space;
  const int n = space.size();

  SpaceAnalysis local;
  const SpaceAnalysis* analysis = options.analysis;
  if (!analysis) {
    local = analyze_space(space);
    analysis = &local;
  }

  BalayageResult out;
  out.input_bmo = bmo_norm(op, f, analysis->balls).first;
  if (out.input_bmo <= 0.0) {
    out.g = f;
    out.remainder = Eigen::VectorXd::Zero(n);
    return out;
  }

  double lambda = options.c0 * out.input_bmo;
  for (const DyadicSystem& sys : ensemble.systems)
    for (int ci : sys.levels.front())
      lambda = std::max(
          lambda, dilated_oscillation_average(op, f, sys, ci) * (1.0 + 1e-9));
  out.lambda = lambda;

  const double inv_m = 1.0 / ensemble.systems.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  std::map<double, Eigen::VectorXd> f_by_side;  // expectation of the graded parts
  for (const DyadicSystem& sys : ensemble.systems) {
    for (int ci : sys.levels.front()) {
      StoppingForest forest = stopping_time(op, f, sys, ci, lambda);
      const DyadicCube& top = sys.cube(ci);
      const Eigen::VectorXd& coarse = forest.heat_at_level(top.level);
      for (int p : top.members) g(p) += inv_m * (coarse(p) + forest.g_part(p));
      for (const auto& gen : forest.generations)
        for (const SelectedCube& sel : gen) {
          const DyadicCube& q = sys.cube(sel.cube);
          auto [it, fresh] =
              f_by_side.try_emplace(q.side, Eigen::VectorXd::Zero(n));
          const Eigen::VectorXd a = forest.coefficient(sel);
          for (int p : q.members) it->second(p) += inv_m * a(p);
        }
    }
  }
  out.g = g;

  Eigen::VectorXd graded_sum = Eigen::VectorXd::Zero(n);
  for (auto& [side, f_side] : f_by_side) {
    graded_sum += f_side;
    out.scale_sup[side] = f_side.cwiseAbs().maxCoeff();
    for (int p = 0; p < n; ++p) {
      if (f_side(p) == 0.0) continue;
      out.sigma.atoms.push_back({p, theta * side, f_side(p) * space.measure(p)});
    }
  }

  out.remainder = graded_sum - sweep(op, out.sigma);
  out.identity_residual =
      (f - out.g - sweep(op, out.sigma) - out.remainder).cwiseAbs().maxCoeff();
  out.remainder_bmo = bmo_norm(op, out.remainder, analysis->balls).first;
  out.contraction = out.remainder_bmo / out.input_bmo;

  // diagnostic buckets: sup of the unsmoothed pieces per scale regime
  if (!f_by_side.empty()) {
    double s_min = f_by_side.begin()->first;
    double s_max = f_by_side.rbegin()->first;
    const double mid = std::sqrt(s_min * s_max);
    for (auto& [side, f_side] : f_by_side) {
      const Eigen::VectorXd rough =
          f_side - op.heat_apply(theta * theta * side * side, f_side);
      const double sup = rough.cwiseAbs().maxCoeff();
      if (side > options.bucket_A * mid)
        out.bucket_coarse = std::max(out.bucket_coarse, sup);
      else if (side * options.bucket_A < mid)
        out.bucket_fine = std::max(out.bucket_fine, sup);
      else
        out.bucket_mid = std::max(out.bucket_mid, sup);
    }
  }
  return out;
}

IterationResult iterate_balayage(const Operator& op, const Eigen::VectorXd& f,
                                 const LatticeEnsemble& ensemble, double theta,
                                 int max_iter, double rho_target,
                                 const BalayageOptions& options) {
  if (max_iter < 1)
    throw std::invalid_argument("iterate_balayage: max_iter must be >= 1");
  if (rho_target <= 0.0 || rho_target >= 1.0)
    throw std::invalid_argument("iterate_balayage: rho_target must be in (0,1)");

  SpaceAnalysis local;
  BalayageOptions opts = options;
  if (!opts.analysis) {
    local = analyze_space(*ensemble.space);
    opts.analysis = &local;
  }

  IterationResult result;
  const int n = ensemble.space->size();
  result.g_total = Eigen::VectorXd::Zero(n);
  result.remainder = f;
  const double f_bmo = bmo_norm(op, f, opts.analysis->balls).first;

  int failures = 0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    BalayageResult step =
        balayage_build(op, result.remainder, ensemble, theta, opts);
    result.g_total += step.g;
    result.sigma_total = merge(result.sigma_total, step.sigma);
    result.remainder = step.remainder;

    IterationRow row;
    row.iteration = iter;
    row.g_inf = result.g_total.cwiseAbs().maxCoeff();
    row.sigma_norm = carleson_norm(result.sigma_total, opts.analysis->balls);
    row.contraction = step.contraction;
    row.remainder_bmo = step.remainder_bmo;
    row.bucket_fine = step.bucket_fine;
    row.bucket_mid = step.bucket_mid;
    row.bucket_coarse = step.bucket_coarse;
    result.history.push_back(row);

    if (iter == 1 && step.contraction >= 1.0)
      throw std::runtime_error(
          "iterate_balayage: first-pass contraction " +
          std::to_string(step.contraction) +
          " >= 1; theta too large, halve it (theta = " +
          std::to_string(theta / 2.0) + ")");
    if (step.remainder_bmo <= 1e-10 * f_bmo) break;
    if (step.contraction > rho_target && ++failures >= 2) break;
  }

  result.identity_residual =
      (f - result.g_total - sweep(op, result.sigma_total) - result.remainder)
          .cwiseAbs()
          .maxCoeff();
  result.final_certificate =
      result.g_total.cwiseAbs().maxCoeff() +
      carleson_norm(result.sigma_total, opts.analysis->balls);
  return result;
}

}  // namespace bmol
