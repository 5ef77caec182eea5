#include "bmol/bmo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace bmol {

namespace {

// Oscillation vectors share heat applications across balls of equal radius.
class OscillationTable {
 public:
  OscillationTable(const Operator& op, const Eigen::VectorXd& f)
      : op_(op), f_(f) {}

  const Eigen::VectorXd& at(double radius) {
    auto it = cache_.find(radius);
    if (it != cache_.end()) return it->second;
    Eigen::VectorXd osc = semigroup_oscillation(op_, f_, radius);
    return cache_.emplace(radius, std::move(osc)).first->second;
  }

 private:
  const Operator& op_;
  const Eigen::VectorXd& f_;
  std::map<double, Eigen::VectorXd> cache_;
};

double ball_average(const Space& space, const Ball& ball,
                    const Eigen::VectorXd& values) {
  double s = 0.0;
  for (int i : ball.members) s += values(i) * space.measure(i);
  return s / ball.mass;
}

}  // namespace

Eigen::VectorXd semigroup_oscillation(const Operator& op,
                                      const Eigen::VectorXd& f, double radius) {
  const double floor_t = op.space().spacing * op.space().spacing;
  const double t = std::max(radius * radius, floor_t);
  return (f - op.heat_apply(t, f)).cwiseAbs();
}

std::pair<double, Ball> bmo_norm(const Operator& op, const Eigen::VectorXd& f,
                                 const std::vector<Ball>& balls) {
  if (balls.empty()) throw std::invalid_argument("bmo_norm: empty ball list");
  OscillationTable table(op, f);
  double best = -1.0;
  const Ball* witness = nullptr;
  for (const Ball& b : balls) {
    const double avg = ball_average(op.space(), b, table.at(b.radius));
    if (avg > best) {
      best = avg;
      witness = &b;
    }
  }
  return {best, *witness};
}

double jn_tail(const Operator& op, const Eigen::VectorXd& f,
               const std::vector<Ball>& balls, double lambda) {
  OscillationTable table(op, f);
  double worst = 0.0;
  for (const Ball& b : balls) {
    const Eigen::VectorXd& osc = table.at(b.radius);
    double over = 0.0;
    for (int i : b.members)
      if (osc(i) > lambda) over += op.space().measure(i);
    worst = std::max(worst, over / b.mass);
  }
  return worst;
}

TailCurve tail_curve(const Operator& op, const Eigen::VectorXd& f,
                     const std::vector<Ball>& balls, double lambda_min,
                     int points) {
  TailCurve curve;
  if (lambda_min <= 0.0) return curve;
  OscillationTable table(op, f);
  double sup_osc = 0.0;
  for (const Ball& b : balls) {
    const Eigen::VectorXd& osc = table.at(b.radius);
    for (int i : b.members) sup_osc = std::max(sup_osc, osc(i));
  }
  // Dimensionless ladder from 1 to the point where every tail vanishes.
  const double top = std::max(sup_osc / lambda_min, 1.0) * 1.02;
  for (int j = 0; j < points; ++j) {
    const double g = std::pow(top, static_cast<double>(j) / (points - 1));
    const double lambda = lambda_min * g;
    curve.lambdas.push_back(lambda);
    double worst = 0.0;
    for (const Ball& b : balls) {
      const Eigen::VectorXd& osc = table.at(b.radius);
      double over = 0.0;
      for (int i : b.members)
        if (osc(i) > lambda) over += op.space().measure(i);
      worst = std::max(worst, over / b.mass);
    }
    curve.tails.push_back(worst);
  }
  return curve;
}

std::pair<double, double> epsilon_L(const Operator& op, const Eigen::VectorXd& f,
                                    const std::vector<Ball>& balls) {
  const double norm = bmo_norm(op, f, balls).first;
  const double lambda0 = 2.0 * norm;
  if (lambda0 <= 0.0) return {0.0, 0.0};
  const TailCurve curve = tail_curve(op, f, balls, lambda0);
  double eps = 0.0;
  for (std::size_t j = 0; j < curve.lambdas.size(); ++j) {
    const double tail = curve.tails[j];
    if (tail <= 0.0) continue;
    if (tail >= 1.0) return {std::numeric_limits<double>::infinity(), lambda0};
    eps = std::max(eps, curve.lambdas[j] / std::log(1.0 / tail));
  }
  return {eps, lambda0};
}

JnReport jn_report(const Operator& op, const Eigen::VectorXd& f,
                   const std::vector<Ball>& balls) {
  JnReport rep;
  auto [norm, witness] = bmo_norm(op, f, balls);
  rep.norm = norm;
  rep.witness = witness;
  rep.lambda0 = 2.0 * norm;
  rep.curve = tail_curve(op, f, balls, rep.lambda0);
  auto [eps, l0] = epsilon_L(op, f, balls);
  rep.epsilon = eps;
  rep.lambda0 = l0;
  return rep;
}

std::pair<double, double> dist_upper(const Operator& op,
                                     const Eigen::VectorXd& f,
                                     const std::vector<Ball>& balls,
                                     const Eigen::VectorXd* candidate_g) {
  const double fmax = f.cwiseAbs().maxCoeff();
  double best = std::numeric_limits<double>::infinity();
  double best_level = 0.0;
  for (int i = 0; i < 64; ++i) {
    // top level excluded: full truncation trivially annihilates the tail on a
    // finite space and the bracket would degenerate
    const double M = fmax * (static_cast<double>(i) / 64.0);
    const Eigen::VectorXd tail =
        f - f.cwiseMax(-M).cwiseMin(M);
    const double norm = bmo_norm(op, tail, balls).first;
    if (norm < best) {
      best = norm;
      best_level = M;
    }
  }
  if (candidate_g) {
    const double norm = bmo_norm(op, f - *candidate_g, balls).first;
    if (norm < best) {
      best = norm;
      best_level = candidate_g->cwiseAbs().maxCoeff();
    }
  }
  return {best, best_level};
}

}  // namespace bmol
