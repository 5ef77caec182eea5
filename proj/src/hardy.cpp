#include "bmol/hardy.hpp"

#include "bmol/bmo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmol {

namespace {

std::vector<std::vector<int>> stencil_neighbors(const Operator& op) {
  const Eigen::MatrixXd& L = op.matrix();
  const int n = static_cast<int>(L.rows());
  const double tol = 1e-14 * L.cwiseAbs().maxCoeff();
  std::vector<std::vector<int>> nbr(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(L(i, j)) > tol) nbr[i].push_back(j);
  return nbr;
}

}  // namespace

Atom make_atom(const Operator& op, const Ball& ball, int M) {
  if (M != 1 && M != 2)
    throw std::invalid_argument("make_atom: only M in {1,2} is supported");
  if (ball.members.empty()) throw std::invalid_argument("make_atom: empty ball");
  const Space& space = op.space();
  const int n = space.size();

  // erode the ball by M stencil layers so every L^k b stays supported in it
  const auto nbr = stencil_neighbors(op);
  std::vector<char> inside(n, 0);
  for (int p : ball.members) inside[p] = 1;
  for (int layer = 0; layer < M; ++layer) {
    std::vector<char> next(n, 0);
    for (int p = 0; p < n; ++p) {
      if (!inside[p]) continue;
      bool interior = true;
      for (int q : nbr[p]) interior = interior && inside[q];
      next[p] = interior;
    }
    inside.swap(next);
  }
  std::vector<int> core;
  for (int p = 0; p < n; ++p)
    if (inside[p]) core.push_back(p);
  if (core.empty())
    throw std::invalid_argument(
        "make_atom: ball of radius " + std::to_string(ball.radius) +
        " vanishes after shrinking by " + std::to_string(M) + " layers");

  Atom atom;
  atom.ball = ball;
  atom.M = M;
  atom.r = ball.radius;

  // bump profile peaked at the ball center, restricted to the eroded core
  Eigen::VectorXd bump = Eigen::VectorXd::Zero(n);
  for (int p : core) {
    const double u = space.dist(ball.center, p) / (ball.radius + space.spacing);
    const double v = std::max(1.0 - u * u, 0.0);
    bump(p) = v * v;
  }
  if (bump.cwiseAbs().maxCoeff() <= 0.0) bump(core.front()) = 1.0;

  const double budget = std::pow(atom.r, 2 * M) / ball.mass;
  double scale = std::numeric_limits<double>::infinity();
  Eigen::VectorXd v = bump;
  const double r2 = atom.r * atom.r;
  for (int k = 0; k <= M; ++k) {
    const double norm = v.cwiseAbs().maxCoeff();
    if (norm > 0.0) scale = std::min(scale, budget / norm);
    if (k < M) v = r2 * op.apply(v);
  }
  atom.b = scale * bump;
  atom.a = atom.b;
  for (int k = 0; k < M; ++k) atom.a = op.apply(atom.a);
  return atom;
}

AtomCheck check_atom(const Operator& op, const Atom& atom) {
  AtomCheck check;
  const Space& space = op.space();
  const int n = space.size();
  std::vector<char> in_ball(n, 0);
  for (int p : atom.ball.members) in_ball[p] = 1;

  const double budget = std::pow(atom.r, 2 * atom.M) / atom.ball.mass;
  const double r2 = atom.r * atom.r;
  Eigen::VectorXd v = atom.b;
  Eigen::VectorXd plain = atom.b;
  for (int k = 0; k <= atom.M; ++k) {
    for (int p = 0; p < n; ++p)
      if (!in_ball[p])
        check.support_leak = std::max(check.support_leak, std::abs(plain(p)));
    check.max_ratio = std::max(check.max_ratio, v.cwiseAbs().maxCoeff() / budget);
    if (k < atom.M) {
      v = r2 * op.apply(v);
      plain = op.apply(plain);
    }
  }
  const double lm_gap = (plain - atom.a).cwiseAbs().maxCoeff();
  check.ok = check.support_leak <= 1e-12 &&
             check.max_ratio <= 1.0 + 1e-10 && lm_gap <= 1e-12;
  return check;
}

Eigen::VectorXd square_function(const Operator& op, const Eigen::VectorXd& f,
                                const std::vector<double>& t_grid) {
  const Space& space = op.space();
  const int n = space.size();
  Eigen::VectorXd s2 = Eigen::VectorXd::Zero(n);
  const double dlog = std::log(2.0);
  for (double t : t_grid) {
    const Eigen::VectorXd v = op.heat_apply_scaled(t * t, 1, f);
    for (int x = 0; x < n; ++x) {
      double cone = 0.0;
      for (int y = 0; y < n; ++y)
        if (space.dist(x, y) < t) cone += v(y) * v(y) * space.measure(y);
      s2(x) += cone / space.ball_mass(x, t) * dlog;
    }
  }
  return s2.cwiseSqrt();
}

PairingReport pairing_test(const Operator& op, const Eigen::VectorXd& f,
                           const std::vector<Atom>& atoms,
                           const std::vector<Ball>& balls) {
  PairingReport rep;
  rep.bmo = bmo_norm(op, f, balls).first;
  for (const Atom& atom : atoms) {
    PairingReport::Row row;
    row.radius = atom.r;
    row.M = atom.M;
    row.pairing = (f.array() * atom.a.array() * op.space().measure.array()).sum();
    if (rep.bmo > 0.0) {
      row.ratio = std::abs(row.pairing) / rep.bmo;
      rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    } else if (std::abs(row.pairing) > 1e-10) {
      rep.degenerate_flag = true;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace bmol
