#pragma once

#include "bmol/semigroup.hpp"
#include "bmol/space.hpp"

#include <Eigen/Dense>

#include <vector>

namespace bmol {

/// (1,inf,M)-atom: a = L^M b with b supported in the ball shrunk by M stencil
/// layers and the scaled sup bounds ||(r^2 L)^k b||_inf <= r^{2M}/mu(B).
struct Atom {
  Ball ball;
  int M = 1;
  double r = 0.0;
  Eigen::VectorXd b;
  Eigen::VectorXd a;
};

/// Largest admissible bump atom inside the ball; throws when the shrunk ball
/// is empty. Only M in {1,2} is supported.
Atom make_atom(const Operator& op, const Ball& ball, int M);

/// Validity of (i)-(iii); returns the max constraint ratio (1 means tight).
struct AtomCheck {
  bool ok = true;
  double max_ratio = 0.0;   // over k of ||(r^2 L)^k b||_inf * mu(B)/r^{2M}
  double support_leak = 0.0;  // largest |L^k b| outside the ball
};
AtomCheck check_atom(const Operator& op, const Atom& atom);

/// Discrete vertical square function with cone aperture d(x,y) < t and
/// dyadic log-spacing weights.
Eigen::VectorXd square_function(const Operator& op, const Eigen::VectorXd& f,
                                const std::vector<double>& t_grid);

struct PairingReport {
  struct Row {
    double radius = 0.0;
    int M = 1;
    double pairing = 0.0;
    double ratio = 0.0;  // |<f,a>| / ||f||_BMO_L
  };
  std::vector<Row> rows;
  double bmo = 0.0;
  double max_ratio = 0.0;
  bool degenerate_flag = false;  // bmo == 0 while some pairing is nonzero
};

PairingReport pairing_test(const Operator& op, const Eigen::VectorXd& f,
                           const std::vector<Atom>& atoms,
                           const std::vector<Ball>& balls);

}  // namespace bmol
