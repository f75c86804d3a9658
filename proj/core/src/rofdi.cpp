#include "romfcc/rofdi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "romfcc/error.hpp"
#include "romfcc/robpca.hpp"

namespace romfcc {
namespace {

std::uint64_t pattern_id(const MissingPattern& pattern) {
  std::uint64_t id = 0;
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    if (pattern[j]) id ^= mix64(j + 1);
  }
  return id;
}

std::vector<Eigen::Index> complement(const MissingPattern& pattern, Eigen::Index k) {
  MissingPattern inv(pattern.size());
  std::transform(pattern.begin(), pattern.end(), inv.begin(), [](char c) { return c ? 0 : 1; });
  return pattern_indices(inv, k);
}

}  // namespace

MissingPattern missing_pattern(const MultiCurve& curve) {
  MissingPattern out(curve.p());
  std::transform(curve.observed.begin(), curve.observed.end(), out.begin(),
                 [](char c) { return c ? 0 : 1; });
  return out;
}

std::vector<Eigen::Index> pattern_indices(const MissingPattern& pattern, Eigen::Index k) {
  std::vector<Eigen::Index> out;
  for (std::size_t j = 0; j < pattern.size(); ++j) {
    if (!pattern[j]) continue;
    for (Eigen::Index r = 0; r < k; ++r) out.push_back(static_cast<Eigen::Index>(j) * k + r);
  }
  return out;
}

Matrix distance_factor(const MfpcaModel& model) {
  Eigen::Index keep = 0;
  const auto l = static_cast<Eigen::Index>(model.L);
  while (keep < l && model.lambda(keep) >= 1e-10 * model.lambda(0)) ++keep;
  return model.wb.leftCols(keep) * model.lambda.head(keep).cwiseSqrt().cwiseInverse().asDiagonal();
}

Matrix distance_matrix(const MfpcaModel& model) {
  const Matrix g = distance_factor(model);
  const Matrix c = g * g.transpose();
  return 0.5 * (c + c.transpose());
}

Matrix missing_predictor(const Matrix& g, const MissingPattern& pattern, Eigen::Index k) {
  const auto m = pattern_indices(pattern, k);
  const auto o = complement(pattern, k);
  if (m.empty()) return Matrix(0, static_cast<Eigen::Index>(o.size()));
  // -pinv(C_mm) C_mo = -pinv(G_m^T) G_o^T. Working with G avoids squaring the
  // condition number. Numerical rank uses the usual max(rows, cols) * eps
  // tolerance on the singular values.
  const Matrix gm_t = g(m, Eigen::all).transpose();
  const Eigen::BDCSVD<Matrix> svd(gm_t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Vector inv = Vector::Zero(sv.size());
  const double eps = std::numeric_limits<double>::epsilon();
  const double cutoff =
      sv.size() > 0 ? static_cast<double>(std::max(gm_t.rows(), gm_t.cols())) * eps * sv(0) : 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  const Matrix pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return -(pinv * g(o, Eigen::all).transpose());
}

Vector closed_form_missing(const Matrix& g, const Vector& z, const MissingPattern& pattern,
                           Eigen::Index k) {
  const auto o = complement(pattern, k);
  if (pattern_indices(pattern, k).empty()) return Vector(0);
  return missing_predictor(g, pattern, k) * z(o);
}

std::optional<ResidualModel> estimate_residual_cov(const Matrix& g,
                                                   const std::vector<Vector>& complete_z,
                                                   const MissingPattern& pattern, Eigen::Index k,
                                                   std::uint64_t seed) {
  const auto m = pattern_indices(pattern, k);
  const auto o = complement(pattern, k);
  const auto n = static_cast<Eigen::Index>(complete_z.size());
  const auto d = static_cast<Eigen::Index>(m.size());
  if (d == 0 || n < d + 2) return std::nullopt;
  const Matrix proj = missing_predictor(g, pattern, k);  // d x |o|
  Matrix resid(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector& z = complete_z[static_cast<std::size_t>(i)];
    resid.row(i) = (z(m) - proj * z(o)).transpose();
  }
  const auto h = static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(n)));
  McdOptions options;
  options.n_starts = kResidualMcdStarts;
  const McdResult mcd = fast_mcd(resid, h, seed, options);
  ResidualModel out;
  out.covariance = 0.5 * (mcd.covariance + mcd.covariance.transpose());
  out.factor = psd_factor(out.covariance);
  return out;
}

std::set<MissingPattern> missing_patterns(const CurveSample& curves) {
  std::set<MissingPattern> out;
  for (const auto& c : curves) {
    if (!c.is_complete()) out.insert(missing_pattern(c));
  }
  return out;
}

ImputationModel build_imputation_model(const CurveSample& complete,
                                       std::shared_ptr<const FunctionalSpace> space,
                                       double delta_imp, const std::set<MissingPattern>& patterns,
                                       std::uint64_t seed) {
  ImputationModel out{fit_mfpca(complete, space, Flavor::kRobust, delta_imp, derive_seed(seed, {0})),
                      Matrix(), Matrix(), {}};
  out.g = distance_factor(out.base);
  out.c = distance_matrix(out.base);
  std::vector<Vector> z;
  z.reserve(complete.size());
  for (const auto& curve : complete) {
    z.push_back(stack(standardize(curve, out.base.loc_scale, *space).coefs));
  }
  for (const auto& pattern : patterns) {
    out.residuals.emplace(pattern, estimate_residual_cov(out.g, z, pattern, out.base.k(),
                                                         derive_seed(seed, {1, pattern_id(pattern)})));
  }
  return out;
}

std::vector<std::size_t> imputation_order(const CurveSample& curves) {
  std::vector<std::size_t> order;
  bool any_complete = false;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (curves[i].is_complete()) {
      any_complete = true;
    } else {
      order.push_back(i);
    }
  }
  if (!any_complete) throw Error(ErrorKind::kCannotInitialize, "no complete case to start imputation");
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return curves[a].n_missing() < curves[b].n_missing();
  });
  return order;
}

MultiCurve impute_one(const ImputationModel& model, const MultiCurve& curve, Rng& rng,
                      bool stochastic, ImputeStats* stats) {
  if (curve.is_complete()) return curve;
  if (curve.n_missing() == curve.p()) {
    throw Error(ErrorKind::kIncompleteObservation, "cannot impute a case with no observed component");
  }
  const MfpcaModel& base = model.base;
  const Eigen::Index k = base.k();
  const MissingPattern pattern = missing_pattern(curve);
  MultiCurve z = standardize(curve, base.loc_scale, *base.space);
  Vector zs = stack(z.coefs);
  Vector cm = closed_form_missing(model.g, zs, pattern, k);
  const auto found = model.residuals.find(pattern);
  const bool have_resid = found != model.residuals.end() && found->second.has_value();
  if (stochastic && have_resid) {
    std::normal_distribution<double> normal;
    Vector e(found->second->factor.cols());
    for (Eigen::Index r = 0; r < e.size(); ++r) e(r) = normal(rng);
    cm += found->second->factor * e;
  }
  if (stats) {
    ++stats->imputed;
    if (stochastic && !have_resid) ++stats->deterministic_fallbacks;
  }
  zs(pattern_indices(pattern, k)) = cm;
  MultiCurve filled;
  filled.coefs = unstack(zs, k);
  filled.observed = pattern;  // unstandardize only the imputed components
  const MultiCurve back = unstandardize(filled, base.loc_scale, *base.space);
  MultiCurve out = curve;
  for (std::size_t j = 0; j < curve.p(); ++j) {
    if (pattern[j]) out.coefs.col(static_cast<Eigen::Index>(j)) = back.coefs.col(static_cast<Eigen::Index>(j));
  }
  out.observed.assign(curve.p(), 1);
  return out;
}

CurveSample impute_all(const ImputationModel& model, const CurveSample& curves, std::uint64_t seed,
                       ImputeStats* stats) {
  CurveSample out = curves;
  for (std::size_t i : imputation_order(curves)) {
    Rng rng(derive_seed(seed, {i}));
    out[i] = impute_one(model, curves[i], rng, true, stats);
  }
  return out;
}

RofdiResult rofdi(const CurveSample& curves, std::shared_ptr<const FunctionalSpace> space,
                  const RofdiConfig& config, const std::set<MissingPattern>& extra_patterns) {
  if (config.m_imputations == 0) {
    throw Error(ErrorKind::kInvalidConfiguration, "at least one imputation is required");
  }
  const std::vector<std::size_t> order = imputation_order(curves);
  CurveSample complete;
  for (const auto& c : curves) {
    if (c.is_complete()) complete.push_back(c);
  }
  if (complete.size() < 10) {
    throw Error(ErrorKind::kInsufficientSample, "imputation needs at least 10 complete cases");
  }
  std::set<MissingPattern> patterns = missing_patterns(curves);
  patterns.insert(extra_patterns.begin(), extra_patterns.end());
  RofdiResult out{{}, build_imputation_model(complete, space, config.delta_imp, patterns, config.seed), {}};
  for (std::size_t pass = 0; pass < config.m_imputations; ++pass) {
    const std::uint64_t pass_seed = derive_seed(config.seed, {2, pass});
    if (config.update_every == 0) {
      out.imputed.push_back(impute_all(out.model, curves, pass_seed, &out.stats));
      continue;
    }
    // Imputed cases join the complete set; the model is refitted every
    // update_every additions.
    CurveSample result = curves;
    CurveSample pool = complete;
    std::optional<ImputationModel> refreshed;
    std::size_t added = 0;
    for (std::size_t i : order) {
      const ImputationModel& current = refreshed ? *refreshed : out.model;
      Rng rng(derive_seed(pass_seed, {i}));
      result[i] = impute_one(current, curves[i], rng, true, &out.stats);
      pool.push_back(result[i]);
      if (++added % config.update_every == 0) {
        refreshed = build_imputation_model(pool, space, config.delta_imp, patterns,
                                           derive_seed(pass_seed, {3, added}));
      }
    }
    out.imputed.push_back(std::move(result));
  }
  return out;
}

}  // namespace romfcc
