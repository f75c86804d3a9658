#include "romfcc/curves.hpp"

#include <algorithm>

#include "romfcc/error.hpp"

namespace romfcc {

MultiCurve MultiCurve::complete(Matrix coefs) {
  MultiCurve out;
  out.observed.assign(static_cast<std::size_t>(coefs.cols()), 1);
  out.coefs = std::move(coefs);
  return out;
}

std::size_t MultiCurve::n_missing() const {
  return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), 0));
}

FunctionalSpace::FunctionalSpace(BasisSystem b)
    : basis(std::move(b)), w(gram(basis)), evaluator(basis, evaluation_grid()) {}

BasisSystem default_basis() { return build_basis(4, 10); }

CurveSample smooth_set(const CurveSet& set, const BasisSystem& basis,
                       std::optional<double> lambda) {
  const Smoother smoother(basis, set.grid);
  CurveSample out;
  out.reserve(set.size());
  const auto k = static_cast<Eigen::Index>(basis.n_basis());
  for (const Matrix& v : set.values) {
    if (static_cast<std::size_t>(v.rows()) != set.grid.size() ||
        static_cast<std::size_t>(v.cols()) != set.p) {
      throw Error(ErrorKind::kShapeError, "case values do not match grid x p");
    }
    Matrix coefs(k, v.cols());
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const Vector y = v.col(j);
      coefs.col(j) = smoother.fit({y.data(), static_cast<std::size_t>(y.size())}, lambda).coefs;
    }
    out.push_back(MultiCurve::complete(std::move(coefs)));
  }
  return out;
}

Vector stack(const Matrix& coefs) {
  return Eigen::Map<const Vector>(coefs.data(), coefs.size());
}

Matrix unstack(const Vector& stacked, Eigen::Index k) {
  if (k <= 0 || stacked.size() % k != 0) throw Error(ErrorKind::kShapeError, "cannot unstack");
  return Eigen::Map<const Matrix>(stacked.data(), k, stacked.size() / k);
}

}  // namespace romfcc
