#pragma once

#include "bmol/space.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

namespace bmol {

enum class OperatorKind { laplacian, schrodinger, bessel };

std::string to_string(OperatorKind k);
OperatorKind operator_kind_from_string(const std::string& s);

struct OperatorParams {
  Eigen::VectorXd potential;  // schrodinger: V >= 0 per point
  double lambda_b = 1.0;      // bessel: index > 0
};

/// Nonnegative self-adjoint operator on the space, with cached spectral
/// decomposition. Heat kernels are densities against mu: applying the
/// semigroup reads (e^{-tL}f)(x) = sum_y K_t(x,y) f(y) mu(y).
class Operator {
 public:
  Operator(const Space& space, OperatorKind kind, Eigen::MatrixXd matrix);

  const Space& space() const { return *space_; }
  OperatorKind kind() const { return kind_; }
  bool conservative() const { return conservative_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const { return eigenvectors_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;  // L f
  Eigen::VectorXd heat_apply(double t, const Eigen::VectorXd& f) const;
  /// (tL)^m e^{-tL} f, computed spectrally.
  Eigen::VectorXd heat_apply_scaled(double t, int m,
                                    const Eigen::VectorXd& f) const;
  /// Kernel density K_t against mu (cached per t).
  const Eigen::MatrixXd& heat_kernel(double t) const;
  /// d/dt of the kernel density, i.e. -L e^{-tL} against mu.
  Eigen::MatrixXd heat_kernel_time_derivative(double t) const;

 private:
  const Space* space_;
  OperatorKind kind_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  bool conservative_ = false;
  mutable std::map<double, Eigen::MatrixXd> kernel_cache_;
};

/// laplacian: graph second difference / spacing^2 with the space's boundary
/// mode. schrodinger: laplacian + diag(V), V >= 0. bessel: 1-D only,
/// Dirichlet at the singular left endpoint, potential (lb^2-lb)/x^2 on the
/// offset coordinates x_i = (i+1)*spacing in (0,1].
Operator build_operator(const Space& space, OperatorKind kind,
                        const OperatorParams& params = {});

struct GaussianFit {
  double C = 0.0;
  double c = 1.0;
  double max_violation = 0.0;  // <= 0 when the bound holds everywhere
  int witness_x = -1, witness_y = -1;
  double witness_t = 0.0;
};

/// Smallest C over the ladder c in {1,2,4,8,16} with
/// |K_t(x,y)| <= C/mu(B(x,sqrt(t))) * exp(-d(x,y)^2/(c t)) over the grid.
GaussianFit gaussian_fit(const Operator& op, const std::vector<double>& t_grid);

/// d0 = ||(e^{-tL} - e^{-KtL}) f||_inf, d1 = ||tL (e^{-tL} - e^{-KtL}) f||_inf.
std::pair<double, double> drift_bound(const Operator& op,
                                      const Eigen::VectorXd& f, double t,
                                      double K);

struct DerivativeFit {
  double C1 = 0.0;
  double c1 = 1.0;
  double max_violation = 0.0;
};

/// Fits |d/dt K_t(x,y)| <= C1/(t mu(B(x,sqrt(t)))) exp(-d^2/(c1 t)) over the
/// grid, same ladder as gaussian_fit.
DerivativeFit time_derivative_check(const Operator& op,
                                    const std::vector<double>& t_grid);

/// Dyadic times spanning [spacing^2, diam^2].
std::vector<double> dyadic_time_grid(const Space& space);

}  // namespace bmol
