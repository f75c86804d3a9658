#pragma once

// Robust functional data imputation: missing components are filled with the
// minimizer of the robust score distance given the observed components, plus
// a residual drawn from a robustly estimated residual covariance.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "romfcc/mfpca.hpp"
#include "romfcc/rng.hpp"

namespace romfcc {

using MissingPattern = std::vector<char>;  // 1 = missing, one entry per component

MissingPattern missing_pattern(const MultiCurve& curve);

/// Stacked coefficient indices of the components selected by a pattern.
std::vector<Eigen::Index> pattern_indices(const MissingPattern& pattern, Eigen::Index k);

/// G = W B Lambda^{-1/2} over the retained components of an MFPCA model, so
/// that C = G G^T; eigenvalues below 1e-10 * lambda_1 are dropped.
Matrix distance_factor(const MfpcaModel& model);
/// C = W B Lambda^{-1} B^T W.
Matrix distance_matrix(const MfpcaModel& model);
/// -pinv(C_mm) C_mo for C = G G^T: maps the observed standardized
/// coefficients to the distance-minimizing missing ones.
Matrix missing_predictor(const Matrix& g, const MissingPattern& pattern, Eigen::Index k);
/// c_m = -pinv(C_mm) C_mo c_o for the standardized stacked vector z, whose
/// entries at the missing positions are ignored.
Vector closed_form_missing(const Matrix& g, const Vector& z, const MissingPattern& pattern,
                           Eigen::Index k);
/// Random starts of the residual MCD fits. One fit is needed per missing
/// pattern, so this is kept below the general FastMCD default.
inline constexpr std::size_t kResidualMcdStarts = 100;

struct ResidualModel {
  Matrix covariance;
  Matrix factor;  // factor * factor^T = covariance
};

/// Residuals of the closed-form prediction of the pattern's components on
/// complete standardized cases; covariance by MCD with coverage 0.75.
/// nullopt when too few cases are available for the block dimension.
std::optional<ResidualModel> estimate_residual_cov(const Matrix& g,
                                                   const std::vector<Vector>& complete_z,
                                                   const MissingPattern& pattern, Eigen::Index k,
                                                   std::uint64_t seed);

struct ImputationModel {
  MfpcaModel base;
  Matrix g;  // distance factor
  Matrix c;  // g g^T
  std::map<MissingPattern, std::optional<ResidualModel>> residuals;
};

/// Fits the robust MFPCA on the complete cases and the residual covariances
/// for the given patterns.
ImputationModel build_imputation_model(const CurveSample& complete,
                                       std::shared_ptr<const FunctionalSpace> space,
                                       double delta_imp, const std::set<MissingPattern>& patterns,
                                       std::uint64_t seed);

std::set<MissingPattern> missing_patterns(const CurveSample& curves);

/// Incomplete cases by ascending missing count, ties by index.
/// Throws cannot-initialize when no case is complete.
std::vector<std::size_t> imputation_order(const CurveSample& curves);

struct ImputeStats {
  std::size_t imputed = 0;
  std::size_t deterministic_fallbacks = 0;
};

/// Fills the missing components of one case. Observed components are copied
/// unchanged. Without a residual model for the pattern (or with
/// stochastic == false) the deterministic closed form is used.
MultiCurve impute_one(const ImputationModel& model, const MultiCurve& curve, Rng& rng,
                      bool stochastic = true, ImputeStats* stats = nullptr);

/// Imputes every incomplete case of a sample in imputation order with a fixed
/// model.
CurveSample impute_all(const ImputationModel& model, const CurveSample& curves, std::uint64_t seed,
                       ImputeStats* stats = nullptr);

struct RofdiConfig {
  double delta_imp = 0.999;
  std::size_t update_every = 0;  // 0: never refresh the model
  std::size_t m_imputations = 5;
  std::uint64_t seed = 0;
};

struct RofdiResult {
  std::vector<CurveSample> imputed;  // m complete data sets
  ImputationModel model;             // the model fitted on the initial complete set
  ImputeStats stats;
};

/// pre: at least 10 complete cases. extra_patterns are included in the
/// initial model's residual table (for later use on other samples).
RofdiResult rofdi(const CurveSample& curves, std::shared_ptr<const FunctionalSpace> space,
                  const RofdiConfig& config, const std::set<MissingPattern>& extra_patterns = {});

}  // namespace romfcc
