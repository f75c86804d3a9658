#pragma once

// Robust location and scale for scalar samples and for samples of univariate
// curves (pointwise Huber M-location and normalized MAD scale).

#include <span>

#include "romfcc/basis.hpp"

namespace romfcc {

struct MedianMad {
  double location = 0.0;
  double scale = 0.0;  // 1.4826 * MAD
  bool degenerate = false;
};

MedianMad scalar_median_mad(std::span<const double> x);

inline constexpr double kHuberTuning = 1.345;
inline constexpr int kHuberMaxIterations = 50;
inline constexpr double kHuberTolerance = 1e-8;

struct HuberLocation {
  double location = 0.0;
  bool converged = true;
};

/// Huber M-estimate of location with tuning constant 1.345 * nMAD, started at
/// the median.
HuberLocation huber_location(std::span<const double> x);

struct FunctionalMean {
  FdCoef coefs;
  bool converged = true;
};

/// Pointwise Huber location on the evaluator's grid, projected back onto the
/// basis by least squares. curves: K x n coefficient matrix (one column per
/// curve).
FunctionalMean functional_m_mean(const Matrix& curves, const CurveEvaluator& evaluator);
FunctionalMean functional_m_mean(const Matrix& curves, const BasisSystem& basis,
                                 const Grid& grid = evaluation_grid());

struct FunctionalScale {
  Vector values;  // variance function on the evaluator's grid
  bool degenerate = false;
};

/// v(t) = (1.4826 * median_i |X_i(t) - mu(t)|)^2, floored at 1e-12 * max_t v(t).
FunctionalScale functional_nmad_scale(const Matrix& curves, const FdCoef& mu,
                                      const CurveEvaluator& evaluator);
FunctionalScale functional_nmad_scale(const Matrix& curves, const FdCoef& mu,
                                      const BasisSystem& basis,
                                      const Grid& grid = evaluation_grid());

}  // namespace romfcc
