#include "bmol/semigroup.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace bmol {

std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::laplacian: return "laplacian";
    case OperatorKind::schrodinger: return "schrodinger";
    case OperatorKind::bessel: return "bessel";
  }
  return "?";
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "laplacian") return OperatorKind::laplacian;
  if (s == "schrodinger") return OperatorKind::schrodinger;
  if (s == "bessel") return OperatorKind::bessel;
  throw std::invalid_argument("unknown operator kind '" + s + "'");
}

Operator::Operator(const Space& space, OperatorKind kind, Eigen::MatrixXd matrix)
    : space_(&space), kind_(kind), matrix_(std::move(matrix)) {
  const int n = space.size();
  if (matrix_.rows() != n || matrix_.cols() != n)
    throw std::invalid_argument("Operator: matrix shape mismatch");
  matrix_ = 0.5 * (matrix_ + matrix_.transpose()).eval();  // symmetrize

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("Operator: eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();

  const double lmax = std::max(eigenvalues_.cwiseAbs().maxCoeff(), 1.0);
  if (eigenvalues_.minCoeff() < -1e-6 * lmax)
    throw std::runtime_error("Operator: matrix is not positive semidefinite");
  for (int i = 0; i < n; ++i)
    if (eigenvalues_(i) < 1e-12 * lmax) eigenvalues_(i) = 0.0;

  conservative_ = matrix_.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10 * lmax;
}

Eigen::VectorXd Operator::apply(const Eigen::VectorXd& f) const {
  return matrix_ * f;
}

Eigen::VectorXd Operator::heat_apply(double t, const Eigen::VectorXd& f) const {
  if (t < 0.0) throw std::invalid_argument("heat_apply: t < 0");
  if (t == 0.0) return f;
  const Eigen::VectorXd coeff = eigenvectors_.transpose() * f;
  const Eigen::VectorXd damped =
      (-t * eigenvalues_.array()).exp() * coeff.array();
  return eigenvectors_ * damped;
}

Eigen::VectorXd Operator::heat_apply_scaled(double t, int m,
                                            const Eigen::VectorXd& f) const {
  const Eigen::VectorXd coeff = eigenvectors_.transpose() * f;
  Eigen::ArrayXd factor = (-t * eigenvalues_.array()).exp();
  for (int j = 0; j < m; ++j) factor *= t * eigenvalues_.array();
  return eigenvectors_ * (factor * coeff.array()).matrix();
}

const Eigen::MatrixXd& Operator::heat_kernel(double t) const {
  if (t <= 0.0) throw std::invalid_argument("heat_kernel: t must be positive");
  auto it = kernel_cache_.find(t);
  if (it != kernel_cache_.end()) return it->second;
  const Eigen::VectorXd damped = (-t * eigenvalues_.array()).exp();
  Eigen::MatrixXd expm =
      eigenvectors_ * damped.asDiagonal() * eigenvectors_.transpose();
  expm = expm * space_->measure.cwiseInverse().asDiagonal();
  return kernel_cache_.emplace(t, std::move(expm)).first->second;
}

Eigen::MatrixXd Operator::heat_kernel_time_derivative(double t) const {
  if (t <= 0.0)
    throw std::invalid_argument("heat_kernel_time_derivative: t <= 0");
  const Eigen::VectorXd damped =
      (-eigenvalues_.array() * (-t * eigenvalues_.array()).exp());
  Eigen::MatrixXd d =
      eigenvectors_ * damped.asDiagonal() * eigenvectors_.transpose();
  return d * space_->measure.cwiseInverse().asDiagonal();
}

namespace {

Eigen::MatrixXd grid_laplacian(const Space& space) {
  const int n = space.size();
  const int side = space.side;
  if (side <= 0)
    throw std::invalid_argument("build_operator: space must be grid-built");
  const double inv_h2 = 1.0 / (space.spacing * space.spacing);
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  auto couple = [&](int a, int b) {
    L(a, a) += inv_h2;
    L(a, b) -= inv_h2;
    L(b, b) += inv_h2;
    L(b, a) -= inv_h2;
  };
  if (space.dim == 1) {
    for (int i = 0; i + 1 < side; ++i) couple(i, i + 1);
    if (space.boundary == Boundary::periodic && side > 2) couple(side - 1, 0);
  } else {
    auto id = [side](int ix, int iy) { return iy * side + ix; };
    for (int iy = 0; iy < side; ++iy)
      for (int ix = 0; ix < side; ++ix) {
        if (ix + 1 < side) couple(id(ix, iy), id(ix + 1, iy));
        if (iy + 1 < side) couple(id(ix, iy), id(ix, iy + 1));
        if (space.boundary == Boundary::periodic && side > 2) {
          if (ix + 1 == side) couple(id(ix, iy), id(0, iy));
          if (iy + 1 == side) couple(id(ix, iy), id(ix, 0));
        }
      }
  }
  return L;
}

}  // namespace

Operator build_operator(const Space& space, OperatorKind kind,
                        const OperatorParams& params) {
  switch (kind) {
    case OperatorKind::laplacian:
      return Operator(space, kind, grid_laplacian(space));
    case OperatorKind::schrodinger: {
      if (params.potential.size() != space.size())
        throw std::invalid_argument(
            "build_operator: schrodinger potential has wrong length");
      if (params.potential.minCoeff() < 0.0)
        throw std::invalid_argument(
            "build_operator: schrodinger potential must be nonnegative");
      Eigen::MatrixXd L = grid_laplacian(space);
      L += Eigen::MatrixXd(params.potential.asDiagonal());
      return Operator(space, kind, std::move(L));
    }
    case OperatorKind::bessel: {
      if (space.dim != 1)
        throw std::invalid_argument("build_operator: bessel needs a 1-D space");
      if (params.lambda_b <= 0.0)
        throw std::invalid_argument("build_operator: bessel index must be > 0");
      Eigen::MatrixXd L = grid_laplacian(space);
      // Dirichlet at the singular left endpoint: the domain is (0,1] with
      // offset coordinates x_i = (i+1)*spacing, and the missing x=0 neighbor
      // acts as a zero boundary value.
      const double inv_h2 = 1.0 / (space.spacing * space.spacing);
      L(0, 0) += inv_h2;
      const double lb = params.lambda_b;
      for (int i = 0; i < space.size(); ++i) {
        const double x = (i + 1) * space.spacing;
        L(i, i) += (lb * lb - lb) / (x * x);
      }
      return Operator(space, kind, std::move(L));
    }
  }
  throw std::invalid_argument("build_operator: unknown kind");
}

namespace {

template <typename KernelAt>
void fit_gaussian_ladder(const Operator& op, const std::vector<double>& t_grid,
                         KernelAt kernel_at, bool divide_by_t, double& out_C,
                         double& out_c, double& out_violation, int* wx, int* wy,
                         double* wt) {
  const Space& space = op.space();
  const int n = space.size();
  static const double ladder[] = {1.0, 2.0, 4.0, 8.0, 16.0};
  double best_C = std::numeric_limits<double>::infinity();
  double best_c = ladder[0];
  for (double c : ladder) {
    double C = 0.0;
    for (double t : t_grid) {
      const Eigen::MatrixXd K = kernel_at(t);
      for (int x = 0; x < n; ++x) {
        const double vol = space.ball_mass(x, std::sqrt(t));
        for (int y = 0; y < n; ++y) {
          const double d = space.dist(x, y);
          double envelope = std::exp(-d * d / (c * t)) / vol;
          if (divide_by_t) envelope /= t;
          const double needed = std::abs(K(x, y)) / envelope;
          if (needed > C) {
            C = needed;
            if (wx) *wx = x;
            if (wy) *wy = y;
            if (wt) *wt = t;
          }
        }
      }
    }
    if (C < best_C) {
      best_C = C;
      best_c = c;
    }
  }
  out_C = best_C;
  out_c = best_c;
  out_violation = 0.0;  // C is chosen as the max ratio, so the bound is tight
}

}  // namespace

GaussianFit gaussian_fit(const Operator& op, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw std::invalid_argument("gaussian_fit: empty t grid");
  const Space& space = op.space();
  const double lo = space.spacing * space.spacing;
  const double hi = space.diameter() * space.diameter();
  for (double t : t_grid)
    if (t < lo * (1.0 - 1e-9) || t > hi * (1.0 + 1e-9))
      throw std::invalid_argument(
          "gaussian_fit: t outside [spacing^2, diam^2]");
  GaussianFit fit;
  fit_gaussian_ladder(
      op, t_grid, [&](double t) { return op.heat_kernel(t); },
      /*divide_by_t=*/false, fit.C, fit.c, fit.max_violation, &fit.witness_x,
      &fit.witness_y, &fit.witness_t);
  return fit;
}

std::pair<double, double> drift_bound(const Operator& op,
                                      const Eigen::VectorXd& f, double t,
                                      double K) {
  if (t <= 0.0) throw std::invalid_argument("drift_bound: t must be positive");
  if (K < 1.0) throw std::invalid_argument("drift_bound: K must be >= 1");
  const Eigen::VectorXd coeff = op.eigenvectors().transpose() * f;
  const Eigen::ArrayXd lam = op.eigenvalues().array();
  const Eigen::ArrayXd diff = (-t * lam).exp() - (-K * t * lam).exp();
  const double d0 =
      (op.eigenvectors() * (diff * coeff.array()).matrix()).cwiseAbs().maxCoeff();
  const double d1 = (op.eigenvectors() * (t * lam * diff * coeff.array()).matrix())
                        .cwiseAbs()
                        .maxCoeff();
  return {d0, d1};
}

DerivativeFit time_derivative_check(const Operator& op,
                                    const std::vector<double>& t_grid) {
  if (t_grid.empty())
    throw std::invalid_argument("time_derivative_check: empty t grid");
  DerivativeFit fit;
  fit_gaussian_ladder(
      op, t_grid, [&](double t) { return op.heat_kernel_time_derivative(t); },
      /*divide_by_t=*/true, fit.C1, fit.c1, fit.max_violation, nullptr, nullptr,
      nullptr);
  return fit;
}

std::vector<double> dyadic_time_grid(const Space& space) {
  std::vector<double> grid;
  const double lo = space.spacing * space.spacing;
  const double hi = space.diameter() * space.diameter();
  for (double t = lo; t < hi; t *= 2.0) grid.push_back(t);
  grid.push_back(hi);
  return grid;
}

}  // namespace bmol
