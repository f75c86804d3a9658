#pragma once

// Functional univariate filter: per component, robust score distances are
// compared with their chi-squared reference and the excess tail is flagged as
// cellwise outliers.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "romfcc/mfpca.hpp"

namespace romfcc {

inline constexpr double kFufAlpha = 0.95;

struct FufDistances {
  Vector distances;
  std::size_t l_fil = 0;
  bool degenerate = false;  // scale collapsed; all distances are zero
};

/// curves: K x n coefficients of one component. Fits a robust one-component
/// MFPCA and returns D_i = sum_{l <= L_fil} xi_il^2 / lambda_l.
FufDistances fuf_distances(const Matrix& curves, std::shared_ptr<const FunctionalSpace> space,
                           double variance_target, std::uint64_t seed);

struct CellFlags {
  double d_n = 0.0;
  std::vector<std::size_t> flagged;  // by decreasing distance, ties by index
};

/// d_n = sup_{x >= eta} (G(x) - G_n(x))^+ with G the chi-squared(L_fil) cdf and
/// eta its alpha quantile; flags the floor(n d_n) largest distances.
CellFlags flag_cells(const Vector& distances, std::size_t l_fil, double alpha = kFufAlpha);

struct FilterReport {
  Matrix distances;  // n x p
  std::vector<std::vector<std::size_t>> flagged;  // per component
  Vector d_n;                                      // per component
  std::vector<std::size_t> l_fil;                  // per component
  double alpha = kFufAlpha;
  std::vector<char> tombstoned;  // per case: every component flagged
};

struct FilterResult {
  CurveSample curves;            // surviving cases with flagged cells masked
  std::vector<std::size_t> kept;  // original indices of the surviving cases
  FilterReport report;
};

/// pre: complete input sample.
FilterResult apply_filter(const CurveSample& curves, std::shared_ptr<const FunctionalSpace> space,
                          double variance_target, double alpha, std::uint64_t seed);

}  // namespace romfcc
