#pragma once

// B-spline bases on [0, 1], Gram (inner-product) matrices and penalized
// least-squares smoothing of discretely observed curves.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "romfcc/linalg.hpp"

namespace romfcc {

/// Basis coefficients of one univariate functional datum.
using FdCoef = Vector;

/// Strictly increasing abscissae in [0, 1], at least two of them.
class Grid {
 public:
  explicit Grid(std::vector<double> points);

  /// n equally spaced points including both endpoints.
  static Grid uniform(std::size_t n);

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }

  bool operator==(const Grid&) const = default;

 private:
  std::vector<double> points_;
};

/// Resolution of the grid used for pointwise robust estimation and
/// standardization.
inline constexpr std::size_t kEvaluationGridSize = 200;
const Grid& evaluation_grid();

/// Clamped B-spline system on [0, 1].
class BasisSystem {
 public:
  /// penalty_order < 0 selects min(2, order - 1).
  BasisSystem(int order, std::vector<double> interior_knots, int penalty_order = -1);

  int order() const noexcept { return order_; }
  int n_basis() const noexcept { return static_cast<int>(interior_knots_.size()) + order_; }
  int penalty_order() const noexcept { return penalty_order_; }
  const std::vector<double>& interior_knots() const noexcept { return interior_knots_; }
  /// Full knot vector with order-fold boundary knots.
  const std::vector<double>& knots() const noexcept { return knots_; }
  /// Distinct knot values 0 = b_0 < ... < b_m = 1.
  std::vector<double> breakpoints() const;

  bool operator==(const BasisSystem& other) const {
    return order_ == other.order_ && penalty_order_ == other.penalty_order_ &&
           interior_knots_ == other.interior_knots_;
  }

 private:
  int order_;
  int penalty_order_;
  std::vector<double> interior_knots_;
  std::vector<double> knots_;
};

/// Uniform interior knots at i / (n_basis - order + 1).
BasisSystem build_basis(int order, int n_basis);

/// Rows: points, columns: basis functions (or their derivative of the given
/// order).
Matrix eval_basis(const BasisSystem& basis, std::span<const double> t, int derivative = 0);
Matrix eval_basis(const BasisSystem& basis, const Grid& grid);

/// Gram matrix W of pairwise L2 inner products of the basis functions together
/// with its symmetric square root and inverse root.
class GramMatrix {
 public:
  /// Throws degenerate-basis if the smallest eigenvalue is below 1e-12 times
  /// the largest.
  static GramMatrix from_matrix(const Matrix& w);

  const Matrix& w() const noexcept { return w_; }
  const Matrix& half() const noexcept { return half_; }
  const Matrix& half_inv() const noexcept { return half_inv_; }
  Eigen::Index size() const noexcept { return w_.rows(); }

 private:
  GramMatrix() = default;
  Matrix w_;
  Matrix half_;
  Matrix half_inv_;
};

/// Composite 5-point Gauss-Legendre quadrature over each knot interval.
GramMatrix gram(const BasisSystem& basis);

/// Gram matrix of the penalty_order-th derivatives.
Matrix penalty_matrix(const BasisSystem& basis);

/// <a, b>_H = sum_j a_j^T W b_j for K x p coefficient matrices.
double inner_product_h(const Matrix& a, const Matrix& b, const GramMatrix& w);

/// Maps coefficients to values on a fixed grid and grid values back to
/// least-squares coefficients.
class CurveEvaluator {
 public:
  CurveEvaluator(const BasisSystem& basis, const Grid& grid);

  const Matrix& design() const noexcept { return design_; }
  std::size_t grid_size() const noexcept { return static_cast<std::size_t>(design_.rows()); }

  /// Columns of coefs are curves; result columns are their grid values.
  Matrix evaluate(const Matrix& coefs) const { return design_ * coefs; }
  Matrix project(const Matrix& values) const { return projector_ * values; }

 private:
  Matrix design_;
  Matrix projector_;
};

/// The 25 log-spaced candidates in [1e-10, 1e2] searched by GCV.
std::vector<double> gcv_lambda_grid();

/// Penalized least squares  ||y - Phi c||^2 + lambda c^T P c  for a fixed
/// basis and observation grid. Construction does the per-grid work once so
/// that fitting many curves is cheap.
class Smoother {
 public:
  Smoother(BasisSystem basis, Grid grid);

  struct Fit {
    FdCoef coefs;
    double lambda = 0.0;
    double gcv = 0.0;
  };

  /// lambda == nullopt selects lambda by generalized cross-validation.
  Fit fit(std::span<const double> y, std::optional<double> lambda) const;

  const BasisSystem& basis() const noexcept { return basis_; }
  const Grid& grid() const noexcept { return grid_; }

 private:
  Fit fit_reinsch(const Vector& y, std::optional<double> lambda) const;
  Fit fit_direct(const Vector& y, std::optional<double> lambda) const;

  BasisSystem basis_;
  Grid grid_;
  Matrix design_;
  Matrix normal_;   // Phi^T Phi
  Matrix penalty_;
  bool normal_pd_ = false;
  // Demmler-Reinsch form: c = T diag(1 / (1 + lambda s)) T^T Phi^T y.
  Matrix transform_;
  Vector spectrum_;
};

FdCoef smooth_curve(std::span<const double> y, const Grid& grid, const BasisSystem& basis,
                    std::optional<double> lambda);

}  // namespace romfcc
