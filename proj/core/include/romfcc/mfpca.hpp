#pragma once

// Multivariate functional PCA on basis coefficients. Components are
// standardized pointwise, stacked, mapped through the block Gram root, and
// decomposed either robustly (ROBPCA) or classically.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "romfcc/curves.hpp"

namespace romfcc {

enum class Flavor { kRobust, kClassical };

std::string to_string(Flavor flavor);
Flavor parse_flavor(const std::string& name);

/// Per-component location (K x p coefficients) and variance functions
/// (evaluation grid x p values, strictly positive).
struct LocationScale {
  Matrix mu;
  Matrix v;
};

/// Robust: functional Huber M-mean and nMAD variance. Classical: mean and
/// unbiased pointwise variance. Only observed components enter each estimate.
LocationScale fit_location_scale(const CurveSample& curves, const FunctionalSpace& space,
                                 Flavor flavor);

/// Z_j = v_j^{-1/2}(X_j - mu_j) evaluated on the evaluation grid and projected
/// back onto the basis; missing components stay missing.
MultiCurve standardize(const MultiCurve& curve, const LocationScale& ls,
                       const FunctionalSpace& space);
/// Exact inverse of standardize on basis coefficients.
MultiCurve unstandardize(const MultiCurve& z, const LocationScale& ls,
                         const FunctionalSpace& space);

struct MfpcaModel {
  std::shared_ptr<const FunctionalSpace> space;
  std::size_t p = 0;
  LocationScale loc_scale;
  Matrix b;       // pK x L_max, columns orthonormal under the block Gram matrix
  Vector lambda;  // L_max, positive, non-increasing
  std::size_t L = 0;
  Flavor flavor = Flavor::kRobust;
  std::uint64_t seed = 0;
  Matrix wb;  // block Gram times b, cached for scores

  std::size_t l_max() const noexcept { return static_cast<std::size_t>(lambda.size()); }
  Eigen::Index k() const noexcept { return space->basis.n_basis(); }
};

/// Smallest L with sum_{l<=L} lambda_l >= target * sum(lambda).
std::size_t select_dimension(const Vector& lambda, double variance_target);

/// Block-diagonal Gram matrix (and its roots) for p components.
Matrix block_diag(const Matrix& block, std::size_t p);

/// Coefficient-space (y = W^{1/2} c) covariance of standardized complete curves,
/// robust (ROBPCA with all computable components) or classical.
Matrix y_covariance(const std::vector<Vector>& stacked_z, Flavor flavor, std::uint64_t seed,
                    const FunctionalSpace& space);

/// Eigendecomposition of a y-space covariance into an MFPCA model. Components
/// are capped at cap and at the positive part of the spectrum.
MfpcaModel mfpca_from_covariance(std::shared_ptr<const FunctionalSpace> space,
                                 LocationScale loc_scale, const Matrix& y_cov, std::size_t cap,
                                 double variance_target, Flavor flavor, std::uint64_t seed);

/// pre: n >= 10, all cases complete.
MfpcaModel fit_mfpca(const CurveSample& curves, std::shared_ptr<const FunctionalSpace> space,
                     Flavor flavor, double variance_target, std::uint64_t seed);

/// Scores of a standardized, stacked coefficient vector on the first l_use
/// components.
Vector scores_standardized(const MfpcaModel& model, const Vector& z_stacked, std::size_t l_use);
Vector scores(const MfpcaModel& model, const MultiCurve& curve, std::size_t l_use);

/// Squared H-norm of the standardized curve left after projecting on the first
/// l_use components.
double residual_norm_sq(const MfpcaModel& model, const Vector& z_stacked, std::size_t l_use);

/// mu + D sum_l xi_l psi_l.
MultiCurve reconstruct(const MfpcaModel& model, const Vector& xi);

/// H-norm of a standardized stacked vector.
double h_norm_sq(const MfpcaModel& model, const Vector& z_stacked);

}  // namespace romfcc
