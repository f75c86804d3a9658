#pragma once

// Hotelling T^2 and squared prediction error charts on MFPCA scores: limits,
// the Phase I design pipeline (filter, impute, fit, calibrate on a tuning set)
// and Phase II alarm decisions.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "romfcc/fuf.hpp"
#include "romfcc/mfpca.hpp"
#include "romfcc/rofdi.hpp"

namespace romfcc {

enum class LimitsMode { kParametric, kEmpirical };

std::string to_string(LimitsMode mode);
LimitsMode parse_limits_mode(const std::string& name);

struct Phase1Config {
  double delta_fil = 0.999;
  double delta_imp = 0.999;
  double delta_mon = 0.7;
  double alpha = 0.05;
  double fuf_alpha = kFufAlpha;
  std::size_t m_imputations = 5;
  std::uint64_t seed = 0;
  Flavor flavor = Flavor::kRobust;  // kClassical: no filter, no imputation
  LimitsMode limits = LimitsMode::kParametric;
};

/// Throws invalid-configuration for out-of-range fields.
void validate(const Phase1Config& config);

struct JacksonTerms {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double h0 = 1.0;
};

/// theta_j = sum of residual eigenvalues to the power j, h0 = 1 - 2 theta1
/// theta3 / (3 theta2^2).
JacksonTerms jackson_terms(const Vector& residual_eigenvalues);

struct ScoreCalibration {
  Vector lambda_mon;   // L_mon score variances from the tuning set
  Vector lambda_res;   // variances of the remaining computable components
  JacksonTerms jackson;
  bool spe_enabled = true;
};

/// Per-chart level of two independent charts with overall level alpha:
/// 1 - (1 - alpha)^{1/2}.
double sidak_alpha(double alpha);

/// Chi-squared(L) quantile at 1 - alpha_star; 0 when alpha_star >= 1.
double t2_limit(std::size_t l_mon, double alpha_star);

/// Jackson-Mudholkar limit. Throws numeric-degenerate when theta1 <= 0 or
/// the bracketed term is not positive; 0 when alpha_star >= 1.
double spe_limit(const JacksonTerms& terms, double alpha_star);

struct MonitoringScheme {
  MfpcaModel model;
  ScoreCalibration calibration;
  double t2_limit = 0.0;
  double spe_limit = 0.0;
  double alpha = 0.05;
  double alpha_star = 0.0;
  Phase1Config config;

  std::size_t l_mon() const noexcept { return model.L; }
};

double t2_stat(const MonitoringScheme& scheme, const MultiCurve& curve);
double spe_stat(const MonitoringScheme& scheme, const MultiCurve& curve);

struct Phase1Diagnostics {
  std::size_t train_tombstoned = 0;
  std::size_t tune_tombstoned = 0;
  std::size_t train_cells_flagged = 0;
  std::size_t tune_cells_flagged = 0;
  std::size_t imputation_fallbacks = 0;
};

struct Phase1Result {
  MonitoringScheme scheme;
  Phase1Diagnostics diagnostics;
};

/// pre: complete training and tuning samples of at least 10 cases each.
Phase1Result phase1_fit(const CurveSample& training, const CurveSample& tuning,
                        std::shared_ptr<const FunctionalSpace> space, const Phase1Config& config);

struct MonitorResult {
  Vector t2;
  Vector spe;
  std::vector<char> alarm;
};

/// Phase II observations must be complete; they are neither filtered nor
/// imputed.
MonitorResult phase2_monitor(const MonitoringScheme& scheme, const CurveSample& batch);

}  // namespace romfcc
