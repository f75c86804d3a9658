#pragma once

// Multivariate functional observations: smoothed (basis coefficients with a
// per-component observation mask) and discrete (values on a grid).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "romfcc/basis.hpp"

namespace romfcc {

/// One case: p univariate curves stored as the columns of a K x p coefficient
/// matrix. A component whose mask entry is 0 is missing and its column is
/// ignored.
struct MultiCurve {
  Matrix coefs;
  std::vector<char> observed;

  static MultiCurve complete(Matrix coefs);

  std::size_t p() const noexcept { return observed.size(); }
  std::size_t n_missing() const;
  bool is_complete() const { return n_missing() == 0; }
};

using CurveSample = std::vector<MultiCurve>;

/// Discretely observed multivariate curves on a common grid.
struct CurveSet {
  Grid grid = Grid::uniform(2);
  std::size_t p = 0;
  std::vector<std::string> case_ids;
  std::vector<Matrix> values;  // one grid x p matrix per case

  std::size_t size() const noexcept { return values.size(); }
};

/// Shared geometry for a basis: the Gram matrix and the evaluator on the
/// pointwise-estimation grid.
struct FunctionalSpace {
  explicit FunctionalSpace(BasisSystem b);

  BasisSystem basis;
  GramMatrix w;
  CurveEvaluator evaluator;
};

/// Cubic B-splines with 10 basis functions and a second-derivative penalty.
BasisSystem default_basis();

/// Smooths every component of every case. lambda == nullopt selects the
/// smoothing parameter by GCV separately for each curve.
CurveSample smooth_set(const CurveSet& set, const BasisSystem& basis,
                       std::optional<double> lambda = std::nullopt);

/// Stacks the p columns into one pK vector (component-major).
Vector stack(const Matrix& coefs);
Matrix unstack(const Vector& stacked, Eigen::Index k);

}  // namespace romfcc
