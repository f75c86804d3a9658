#include "romfcc/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace romfcc {

SymEigen sym_eigen_desc(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  const Eigen::Index n = a.rows();
  SymEigen out;
  if (n == 0) return out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

void canonicalize_signs(Matrix& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    Eigen::Index imax = 0;
    columns.col(j).cwiseAbs().maxCoeff(&imax);
    if (columns(imax, j) < 0.0) columns.col(j) *= -1.0;
  }
}

Matrix pinv_psd(const Matrix& a, double rel_tol) {
  const SymEigen eig = sym_eigen_desc(0.5 * (a + a.transpose()));
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  const double cutoff = rel_tol * std::max(eig.values(0), 0.0);
  Vector inv = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (eig.values(i) > cutoff && eig.values(i) > 0.0) inv(i) = 1.0 / eig.values(i);
  }
  return eig.vectors * inv.asDiagonal() * eig.vectors.transpose();
}

Matrix psd_factor(const Matrix& a) {
  const SymEigen eig = sym_eigen_desc(0.5 * (a + a.transpose()));
  const Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return eig.vectors * root.asDiagonal();
}

Vector row_mean(const Matrix& x) { return x.colwise().mean().transpose(); }

Matrix covariance(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) return Matrix::Zero(x.cols(), x.cols());
  const Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix c = Matrix::Zero(x.cols(), x.cols());
  c.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  c = c.selfadjointView<Eigen::Lower>();
  return c / static_cast<double>(n - 1);
}

Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

double max_principal_angle(const Matrix& a, const Matrix& b) {
  const Matrix qa = Eigen::HouseholderQR<Matrix>(a).householderQ() *
                    Matrix::Identity(a.rows(), a.cols());
  const Matrix qb = Eigen::HouseholderQR<Matrix>(b).householderQ() *
                    Matrix::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<Matrix> svd(qa.transpose() * qb);
  const double smin = svd.singularValues().minCoeff();
  // acos loses accuracy near 1; use the sine of the angle via the residual.
  const Matrix resid = qb - qa * (qa.transpose() * qb);
  const double smax_resid = Eigen::JacobiSVD<Matrix>(resid).singularValues().maxCoeff();
  return smin > 0.7 ? std::asin(std::min(1.0, smax_resid)) : std::acos(std::clamp(smin, -1.0, 1.0));
}

}  // namespace romfcc
