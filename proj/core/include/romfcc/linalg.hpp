#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace romfcc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenpairs of a symmetric matrix sorted by non-increasing eigenvalue.
struct SymEigen {
  Vector values;
  Matrix vectors;  // columns
};

SymEigen sym_eigen_desc(const Matrix& a);

/// Flips each column so that its entry of largest magnitude is positive.
void canonicalize_signs(Matrix& columns);

/// Moore-Penrose inverse of a symmetric positive semidefinite matrix;
/// eigenvalues at or below rel_tol * max eigenvalue are treated as zero.
Matrix pinv_psd(const Matrix& a, double rel_tol = 1e-10);

/// Symmetric factor F with F F^T = a, negative eigenvalues floored at zero.
Matrix psd_factor(const Matrix& a);

/// Sample mean of the rows of x.
Vector row_mean(const Matrix& x);

/// Unbiased covariance of the rows of x.
Matrix covariance(const Matrix& x);

/// Rows of x selected by index.
Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows);

/// Largest principal angle (radians) between the column spans of a and b.
double max_principal_angle(const Matrix& a, const Matrix& b);

}  // namespace romfcc
