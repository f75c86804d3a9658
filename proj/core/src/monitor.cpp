#include "romfcc/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "romfcc/error.hpp"
#include "romfcc/rng.hpp"
#include "romfcc/robust_univariate.hpp"
#include "romfcc/stats.hpp"

namespace romfcc {

std::string to_string(LimitsMode mode) {
  return mode == LimitsMode::kParametric ? "parametric" : "empirical";
}

LimitsMode parse_limits_mode(const std::string& name) {
  if (name == "parametric") return LimitsMode::kParametric;
  if (name == "empirical") return LimitsMode::kEmpirical;
  throw Error(ErrorKind::kInvalidConfiguration,
              "unknown limits mode '" + name + "' (expected parametric or empirical)");
}

void validate(const Phase1Config& c) {
  const auto fraction = [](double v, const char* name) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw Error(ErrorKind::kInvalidConfiguration, std::string(name) + " must lie in (0, 1]");
    }
  };
  fraction(c.delta_fil, "delta_fil");
  fraction(c.delta_imp, "delta_imp");
  fraction(c.delta_mon, "delta_mon");
  fraction(c.alpha, "alpha");
  if (!(c.fuf_alpha > 0.0 && c.fuf_alpha < 1.0)) {
    throw Error(ErrorKind::kInvalidConfiguration, "filter alpha must lie in (0, 1)");
  }
  if (c.m_imputations == 0) {
    throw Error(ErrorKind::kInvalidConfiguration, "m_imputations must be positive");
  }
}

JacksonTerms jackson_terms(const Vector& residual_eigenvalues) {
  JacksonTerms t;
  for (double l : residual_eigenvalues) {
    t.theta1 += l;
    t.theta2 += l * l;
    t.theta3 += l * l * l;
  }
  t.h0 = t.theta2 > 0.0 ? 1.0 - 2.0 * t.theta1 * t.theta3 / (3.0 * t.theta2 * t.theta2) : 1.0;
  return t;
}

double sidak_alpha(double alpha) { return 1.0 - std::sqrt(1.0 - alpha); }

double t2_limit(std::size_t l_mon, double alpha_star) {
  if (l_mon == 0) throw Error(ErrorKind::kInvalidConfiguration, "T2 limit needs L >= 1");
  if (alpha_star >= 1.0) return 0.0;
  return chi2_quantile(static_cast<double>(l_mon), 1.0 - alpha_star);
}

double spe_limit(const JacksonTerms& t, double alpha_star) {
  if (!(t.theta1 > 0.0)) throw Error(ErrorKind::kNumericDegenerate, "SPE limit needs theta1 > 0");
  if (alpha_star >= 1.0) return 0.0;
  const double c = normal_quantile(1.0 - alpha_star);
  const double h0 = t.h0;
  const double bracket = c * std::sqrt(2.0 * t.theta2 * h0 * h0) / t.theta1 + 1.0 +
                         t.theta2 * h0 * (h0 - 1.0) / (t.theta1 * t.theta1);
  if (!(bracket > 0.0) || h0 == 0.0) {
    throw Error(ErrorKind::kNumericDegenerate,
                "SPE limit bracket is not positive (theta1 = " + std::to_string(t.theta1) +
                    ", theta2 = " + std::to_string(t.theta2) + ", h0 = " + std::to_string(h0) + ")");
  }
  return t.theta1 * std::pow(bracket, 1.0 / h0);
}

namespace {

Vector standardized(const MfpcaModel& model, const MultiCurve& curve) {
  if (!curve.is_complete()) {
    throw Error(ErrorKind::kIncompleteObservation, "monitoring needs all components observed");
  }
  if (curve.p() != model.p || curve.coefs.rows() != model.k()) {
    throw Error(ErrorKind::kShapeError, "curve does not match the model basis");
  }
  return stack(standardize(curve, model.loc_scale, *model.space).coefs);
}

double t2_from_scores(const Vector& xi, const Vector& lambda_mon) {
  return xi.cwiseAbs2().cwiseQuotient(lambda_mon).sum();
}

// Robust (squared nMAD) or classical (unbiased sample) variance of each
// score column.
Vector score_variances(const Matrix& scores, Flavor flavor) {
  Vector out(scores.cols());
  std::vector<double> col(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index l = 0; l < scores.cols(); ++l) {
    for (Eigen::Index i = 0; i < scores.rows(); ++i) col[static_cast<std::size_t>(i)] = scores(i, l);
    if (flavor == Flavor::kRobust) {
      const double s = scalar_median_mad(col).scale;
      out(l) = s * s;
    } else {
      out(l) = variance(col);
    }
  }
  return out;
}

struct PreparedSamples {
  std::vector<CurveSample> training_sets;  // complete, one per imputation
  CurveSample tuning;                      // complete
};

PreparedSamples prepare_robust(const CurveSample& training, const CurveSample& tuning,
                               const std::shared_ptr<const FunctionalSpace>& space,
                               const Phase1Config& config, Phase1Diagnostics& diag) {
  const FilterResult ft =
      apply_filter(training, space, config.delta_fil, config.fuf_alpha, derive_seed(config.seed, {1}));
  const FilterResult fv =
      apply_filter(tuning, space, config.delta_fil, config.fuf_alpha, derive_seed(config.seed, {2}));
  const auto count_flags = [](const FilterReport& r) {
    std::size_t total = 0;
    for (const auto& f : r.flagged) total += f.size();
    return total;
  };
  diag.train_tombstoned = training.size() - ft.curves.size();
  diag.tune_tombstoned = tuning.size() - fv.curves.size();
  diag.train_cells_flagged = count_flags(ft.report);
  diag.tune_cells_flagged = count_flags(fv.report);
  if (ft.curves.size() < 10) {
    throw Error(ErrorKind::kInsufficientSample, "fewer than 10 training cases survive the filter");
  }
  if (fv.curves.size() < 10) {
    throw Error(ErrorKind::kInsufficientSample, "fewer than 10 tuning cases survive the filter");
  }
  PreparedSamples out;
  const std::set<MissingPattern> train_patterns = missing_patterns(ft.curves);
  const std::set<MissingPattern> tune_patterns = missing_patterns(fv.curves);
  if (train_patterns.empty() && tune_patterns.empty()) {
    out.training_sets.push_back(ft.curves);
    out.tuning = fv.curves;
    return out;
  }
  RofdiConfig rc;
  rc.delta_imp = config.delta_imp;
  rc.m_imputations = train_patterns.empty() ? 1 : config.m_imputations;
  rc.seed = derive_seed(config.seed, {3});
  RofdiResult r = rofdi(ft.curves, space, rc, tune_patterns);
  out.training_sets = std::move(r.imputed);
  ImputeStats tune_stats;
  out.tuning = impute_all(r.model, fv.curves, derive_seed(config.seed, {5}), &tune_stats);
  diag.imputation_fallbacks = r.stats.deterministic_fallbacks + tune_stats.deterministic_fallbacks;
  return out;
}

}  // namespace

double t2_stat(const MonitoringScheme& scheme, const MultiCurve& curve) {
  const Vector xi = scores_standardized(scheme.model, standardized(scheme.model, curve), scheme.l_mon());
  return t2_from_scores(xi, scheme.calibration.lambda_mon);
}

double spe_stat(const MonitoringScheme& scheme, const MultiCurve& curve) {
  return residual_norm_sq(scheme.model, standardized(scheme.model, curve), scheme.l_mon());
}

Phase1Result phase1_fit(const CurveSample& training, const CurveSample& tuning,
                        std::shared_ptr<const FunctionalSpace> space, const Phase1Config& config) {
  validate(config);
  if (training.size() < 10 || tuning.size() < 10) {
    throw Error(ErrorKind::kInsufficientSample, "training and tuning sets need at least 10 cases");
  }
  for (const auto* set : {&training, &tuning}) {
    for (const auto& c : *set) {
      if (!c.is_complete()) throw Error(ErrorKind::kIncompleteObservation, "Phase I input must be complete");
    }
  }
  Phase1Result result;
  MonitoringScheme& s = result.scheme;
  s.config = config;
  s.alpha = config.alpha;
  s.alpha_star = sidak_alpha(config.alpha);

  const std::size_t pk = static_cast<std::size_t>(space->basis.n_basis()) * training.front().p();
  CurveSample tune_ready;
  if (config.flavor == Flavor::kClassical) {
    s.model = fit_mfpca(training, space, Flavor::kClassical, config.delta_mon, config.seed);
    tune_ready = tuning;
  } else {
    PreparedSamples prep = prepare_robust(training, tuning, space, config, result.diagnostics);
    const auto m = static_cast<double>(prep.training_sets.size());
    LocationScale ls{Matrix::Zero(space->basis.n_basis(), static_cast<Eigen::Index>(training.front().p())),
                     Matrix::Zero(static_cast<Eigen::Index>(space->evaluator.grid_size()),
                                  static_cast<Eigen::Index>(training.front().p()))};
    for (const auto& set : prep.training_sets) {
      const LocationScale one = fit_location_scale(set, *space, Flavor::kRobust);
      ls.mu += one.mu / m;
      ls.v += one.v / m;
    }
    Matrix cov;
    for (std::size_t i = 0; i < prep.training_sets.size(); ++i) {
      std::vector<Vector> z;
      z.reserve(prep.training_sets[i].size());
      for (const auto& c : prep.training_sets[i]) z.push_back(stack(standardize(c, ls, *space).coefs));
      const Matrix one = y_covariance(z, Flavor::kRobust, derive_seed(config.seed, {4, i}), *space);
      cov = i == 0 ? (one / m).eval() : (cov + one / m).eval();
    }
    const std::size_t cap = std::min(prep.training_sets.front().size() - 1, pk);
    s.model = mfpca_from_covariance(space, std::move(ls), cov, cap, config.delta_mon,
                                    Flavor::kRobust, config.seed);
    tune_ready = std::move(prep.tuning);
  }

  // Calibrate the score distribution on the tuning set.
  const std::size_t l_all = s.model.l_max();
  const std::size_t l_mon = s.model.L;
  Matrix tune_scores(static_cast<Eigen::Index>(tune_ready.size()), static_cast<Eigen::Index>(l_all));
  std::vector<Vector> tune_z;
  tune_z.reserve(tune_ready.size());
  for (std::size_t i = 0; i < tune_ready.size(); ++i) {
    tune_z.push_back(standardized(s.model, tune_ready[i]));
    tune_scores.row(static_cast<Eigen::Index>(i)) = scores_standardized(s.model, tune_z.back(), l_all).transpose();
  }
  const Vector variances = score_variances(tune_scores, config.flavor);
  ScoreCalibration& cal = s.calibration;
  cal.lambda_mon = variances.head(static_cast<Eigen::Index>(l_mon));
  cal.lambda_res = variances.tail(static_cast<Eigen::Index>(l_all - l_mon));
  if (!(cal.lambda_mon.minCoeff() > 0.0)) {
    throw Error(ErrorKind::kNumericDegenerate, "a monitored score has zero tuning variance");
  }
  cal.jackson = jackson_terms(cal.lambda_res);
  cal.spe_enabled = cal.jackson.theta1 > 0.0;

  if (config.limits == LimitsMode::kParametric) {
    s.t2_limit = t2_limit(l_mon, s.alpha_star);
    s.spe_limit = cal.spe_enabled ? spe_limit(cal.jackson, s.alpha_star)
                                  : std::numeric_limits<double>::infinity();
  } else {
    std::vector<double> t2(tune_ready.size()), spe(tune_ready.size());
    for (std::size_t i = 0; i < tune_ready.size(); ++i) {
      const Vector xi = tune_scores.row(static_cast<Eigen::Index>(i)).head(static_cast<Eigen::Index>(l_mon)).transpose();
      t2[i] = t2_from_scores(xi, cal.lambda_mon);
      spe[i] = residual_norm_sq(s.model, tune_z[i], l_mon);
    }
    const double q = std::max(0.0, 1.0 - s.alpha_star);
    s.t2_limit = sample_quantile(t2, q);
    s.spe_limit = cal.spe_enabled ? sample_quantile(spe, q) : std::numeric_limits<double>::infinity();
  }
  return result;
}

MonitorResult phase2_monitor(const MonitoringScheme& scheme, const CurveSample& batch) {
  MonitorResult out;
  const auto n = static_cast<Eigen::Index>(batch.size());
  out.t2.resize(n);
  out.spe.resize(n);
  out.alarm.assign(batch.size(), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const MultiCurve& c = batch[static_cast<std::size_t>(i)];
    if (!c.is_complete()) {
      throw Error(ErrorKind::kIncompleteObservation,
                  "Phase II case " + std::to_string(i) + " has missing components");
    }
    const Vector z = standardized(scheme.model, c);
    const Vector xi = scores_standardized(scheme.model, z, scheme.l_mon());
    out.t2(i) = t2_from_scores(xi, scheme.calibration.lambda_mon);
    out.spe(i) = residual_norm_sq(scheme.model, z, scheme.l_mon());
    out.alarm[static_cast<std::size_t>(i)] =
        out.t2(i) > scheme.t2_limit || (scheme.calibration.spe_enabled && out.spe(i) > scheme.spe_limit);
  }
  return out;
}

}  // namespace romfcc
