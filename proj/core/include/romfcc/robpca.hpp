#pragma once

// Casewise-robust covariance and PCA: exact univariate MCD, FastMCD with
// concentration steps, and ROBPCA (projection-pursuit outlyingness followed by
// a reweighted MCD in the retained subspace).

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "romfcc/linalg.hpp"

namespace romfcc {

struct UnivariateMcd {
  double location = 0.0;
  double scale = 0.0;
};

/// Mean and consistency-corrected standard deviation of the contiguous window
/// of h sorted values with the smallest variance.
UnivariateMcd univariate_mcd(std::span<const double> x, std::size_t h);

/// Variance consistency factor of a normal sample trimmed to the fraction
/// `coverage` of smallest Mahalanobis distances:
/// F_{chi2, dim+2}(chi2_{dim}^{-1}(coverage)) / coverage. Divide a trimmed
/// covariance by it to make it consistent at the normal model.
double mcd_consistency(std::size_t dim, double coverage);

struct McdOptions {
  std::size_t n_starts = 500;
  std::size_t n_finalists = 10;
  int initial_csteps = 2;
  int max_csteps = 200;
  /// Extra starting subsets (row indices); each is always carried to the
  /// final concentration stage next to the best random starts.
  std::vector<std::vector<std::size_t>> extra_starts;
};

/// Mean, ML covariance and log-determinant of a subset of rows.
struct SubsetFit {
  Vector center;
  Matrix covariance;
  double log_det = 0.0;
  std::vector<std::size_t> subset;  // sorted row indices
};

SubsetFit fit_subset(const Matrix& x, std::vector<std::size_t> subset);

/// Squared Mahalanobis distances of all rows; a singular covariance is
/// regularized by 1e-10 * trace / dim on the diagonal.
Vector mahalanobis_sq(const Matrix& x, const Vector& center, const Matrix& covariance);

/// One concentration step: the h rows closest to `current` in Mahalanobis
/// distance, refitted.
SubsetFit c_step(const Matrix& x, const SubsetFit& current, std::size_t h);

struct McdResult {
  Vector center;
  Matrix covariance;  // consistency-corrected raw MCD covariance
  double log_det = 0.0;  // of the uncorrected subset covariance
  std::vector<std::size_t> subset;
  std::size_t h = 0;
};

McdResult fast_mcd(const Matrix& x, std::size_t h, std::uint64_t seed,
                   const McdOptions& options = {});

struct ReweightedMcd {
  Vector center;
  Matrix covariance;
  std::vector<char> weights;  // 1 if retained by the reweighting rule
};

/// One-step reweighting: rows with squared distance <= chi2_dim(quantile)
/// are kept, their ML covariance is made consistent.
ReweightedMcd reweight_mcd(const Matrix& x, const McdResult& raw, double quantile = 0.975);

struct RobpcaOptions {
  std::size_t n_directions = 250;
  McdOptions mcd;
  double reweight_quantile = 0.975;
  /// When non-empty, these row pairs define the projection directions instead
  /// of random draws.
  std::vector<std::pair<std::size_t, std::size_t>> direction_pairs;
};

struct RobpcaResult {
  Vector center;       // q
  Matrix loadings;     // q x k, orthonormal columns
  Vector eigenvalues;  // k, non-increasing
  std::size_t h = 0;
  Vector outlyingness;     // n
  std::vector<char> weights;  // final reweighting membership, n
  bool rank_reduced = false;
};

/// pre: n >= 10, 1 <= k <= min(n - 1, q), 0.5 <= alpha_h <= 1.
RobpcaResult robpca(const Matrix& x, std::size_t k, double alpha_h, std::uint64_t seed,
                    const RobpcaOptions& options = {});

}  // namespace romfcc
