#include "romfcc/robpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "romfcc/error.hpp"
#include "romfcc/rng.hpp"
#include "romfcc/stats.hpp"

namespace romfcc {
namespace {

double regularization(const Matrix& cov) {
  const double reg = 1e-10 * cov.trace() / static_cast<double>(cov.rows());
  return reg > 0.0 ? reg : std::numeric_limits<double>::min();
}

// Cholesky of a covariance, regularized when singular.
Eigen::LLT<Matrix> safe_llt(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) return llt;
  Matrix reg = cov;
  reg.diagonal().array() += regularization(cov);
  return Eigen::LLT<Matrix>(reg);
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

std::vector<std::size_t> smallest_h(const Vector& d, std::size_t h) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(d.size()));
  std::iota(idx.begin(), idx.end(), 0);
  const auto by_distance = [&](std::size_t a, std::size_t b) {
    const double da = d(static_cast<Eigen::Index>(a)), db = d(static_cast<Eigen::Index>(b));
    return da < db || (da == db && a < b);
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(h - 1), idx.end(),
                   by_distance);
  idx.resize(h);
  std::sort(idx.begin(), idx.end());
  return idx;
}

McdResult finish_mcd(const SubsetFit& best, std::size_t n, std::size_t h) {
  McdResult out;
  out.center = best.center;
  const double factor = h < n ? mcd_consistency(static_cast<std::size_t>(best.center.size()),
                                                static_cast<double>(h) / static_cast<double>(n))
                              : 1.0;
  out.covariance = best.covariance / factor;
  out.log_det = best.log_det;
  out.subset = best.subset;
  out.h = h;
  return out;
}

}  // namespace

UnivariateMcd univariate_mcd(std::span<const double> x, std::size_t h) {
  const std::size_t n = x.size();
  if (h < 2 || h > n) {
    throw Error(ErrorKind::kInvalidConfiguration,
                "univariate MCD needs 2 <= h <= n (h = " + std::to_string(h) +
                    ", n = " + std::to_string(n) + ")");
  }
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  // Shift by the median to limit cancellation in the running sums.
  const double shift = s[n / 2];
  std::vector<double> c1(n + 1, 0.0), c2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = s[i] - shift;
    c1[i + 1] = c1[i] + v;
    c2[i + 1] = c2[i] + v * v;
  }
  const double hd = static_cast<double>(h);
  double best_var = std::numeric_limits<double>::infinity();
  double best_mean = 0.0;
  for (std::size_t start = 0; start + h <= n; ++start) {
    const double sum = c1[start + h] - c1[start];
    const double sq = c2[start + h] - c2[start];
    const double m = sum / hd;
    const double var = std::max(sq / hd - m * m, 0.0);
    if (var < best_var) {
      best_var = var;
      best_mean = m;
    }
  }
  UnivariateMcd out;
  out.location = best_mean + shift;
  const double factor = h < n ? mcd_consistency(1, hd / static_cast<double>(n)) : 1.0;
  out.scale = std::sqrt(best_var / factor);
  return out;
}

double mcd_consistency(std::size_t dim, double coverage) {
  if (coverage >= 1.0) return 1.0;
  const double d = static_cast<double>(dim);
  return chi2_cdf(d + 2.0, chi2_quantile(d, coverage)) / coverage;
}

SubsetFit fit_subset(const Matrix& x, std::vector<std::size_t> subset) {
  SubsetFit out;
  const Matrix xs = select_rows(x, subset);
  out.center = row_mean(xs);
  const Matrix centered = xs.rowwise() - out.center.transpose();
  Matrix cov = Matrix::Zero(x.cols(), x.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  out.covariance = Matrix(cov.selfadjointView<Eigen::Lower>()) / static_cast<double>(xs.rows());
  out.log_det = log_det(safe_llt(out.covariance));
  out.subset = std::move(subset);
  return out;
}

Vector mahalanobis_sq(const Matrix& x, const Vector& center, const Matrix& covariance) {
  const Eigen::LLT<Matrix> llt = safe_llt(covariance);
  Matrix centered = (x.rowwise() - center.transpose()).transpose();
  llt.matrixL().solveInPlace(centered);
  return centered.colwise().squaredNorm().transpose();
}

SubsetFit c_step(const Matrix& x, const SubsetFit& current, std::size_t h) {
  return fit_subset(x, smallest_h(mahalanobis_sq(x, current.center, current.covariance), h));
}

McdResult fast_mcd(const Matrix& x, std::size_t h, std::uint64_t seed, const McdOptions& options) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(x.cols());
  if (h > n || h == 0) throw Error(ErrorKind::kInvalidConfiguration, "MCD needs 1 <= h <= n");
  if (n < k + 2) throw Error(ErrorKind::kInsufficientSample, "MCD needs n > k + 1");
  if (h == n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return finish_mcd(fit_subset(x, std::move(all)), n, h);
  }
  if (k == 1) {
    // Exact solution: the best contiguous window of the sorted sample.
    std::vector<double> v(x.data(), x.data() + n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_start = 0;
    double s1 = 0.0, s2 = 0.0;
    const double shift = v[order[n / 2]];
    for (std::size_t i = 0; i < h; ++i) {
      const double t = v[order[i]] - shift;
      s1 += t;
      s2 += t * t;
    }
    for (std::size_t start = 0;; ++start) {
      const double var = s2 / static_cast<double>(h) - (s1 / static_cast<double>(h)) * (s1 / static_cast<double>(h));
      if (var < best) {
        best = var;
        best_start = start;
      }
      if (start + h >= n) break;
      const double out_v = v[order[start]] - shift, in_v = v[order[start + h]] - shift;
      s1 += in_v - out_v;
      s2 += in_v * in_v - out_v * out_v;
    }
    std::vector<std::size_t> subset(order.begin() + static_cast<std::ptrdiff_t>(best_start),
                                    order.begin() + static_cast<std::ptrdiff_t>(best_start + h));
    std::sort(subset.begin(), subset.end());
    return finish_mcd(fit_subset(x, std::move(subset)), n, h);
  }

  Rng rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<SubsetFit> candidates;
  candidates.reserve(options.n_starts);
  for (std::size_t s = 0; s < options.n_starts; ++s) {
    // Partial Fisher-Yates for a random (k+1)-subset.
    for (std::size_t i = 0; i < k + 1; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    std::vector<std::size_t> start(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k + 1));
    std::sort(start.begin(), start.end());
    SubsetFit fit = fit_subset(x, std::move(start));
    for (int c = 0; c < options.initial_csteps; ++c) fit = c_step(x, fit, h);
    candidates.push_back(std::move(fit));
  }
  const std::size_t keep = std::min(options.n_finalists, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(),
                    [](const SubsetFit& a, const SubsetFit& b) { return a.log_det < b.log_det; });
  candidates.resize(keep);
  for (const auto& extra : options.extra_starts) {
    if (extra.size() < k + 1) continue;
    std::vector<std::size_t> start = extra;
    std::sort(start.begin(), start.end());
    SubsetFit fit = fit_subset(x, std::move(start));
    if (fit.subset.size() != h) fit = c_step(x, fit, h);
    candidates.push_back(std::move(fit));
  }
  SubsetFit* best = nullptr;
  for (auto& fit : candidates) {
    for (int c = 0; c < options.max_csteps; ++c) {
      SubsetFit next = c_step(x, fit, h);
      const bool same = next.subset == fit.subset;
      const bool improved = next.log_det < fit.log_det;
      if (improved || same) fit = std::move(next);
      if (same || !improved) break;
    }
    if (best == nullptr || fit.log_det < best->log_det) best = &fit;
  }
  return finish_mcd(*best, n, h);
}

ReweightedMcd reweight_mcd(const Matrix& x, const McdResult& raw, double quantile) {
  const auto dim = static_cast<std::size_t>(x.cols());
  const double cutoff = chi2_quantile(static_cast<double>(dim), quantile);
  const Vector d2 = mahalanobis_sq(x, raw.center, raw.covariance);
  ReweightedMcd out;
  out.weights.assign(static_cast<std::size_t>(x.rows()), 0);
  std::vector<std::size_t> kept;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (d2(i) <= cutoff) {
      out.weights[static_cast<std::size_t>(i)] = 1;
      kept.push_back(static_cast<std::size_t>(i));
    }
  }
  if (kept.size() < dim + 1) {
    out.center = raw.center;
    out.covariance = raw.covariance;
    return out;
  }
  const SubsetFit fit = fit_subset(x, kept);
  out.center = fit.center;
  const double coverage = static_cast<double>(kept.size()) / static_cast<double>(x.rows());
  out.covariance = coverage < 1.0 ? fit.covariance / mcd_consistency(dim, quantile) : fit.covariance;
  return out;
}

RobpcaResult robpca(const Matrix& x, std::size_t k, double alpha_h, std::uint64_t seed,
                    const RobpcaOptions& options) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto q = static_cast<std::size_t>(x.cols());
  if (n < 10) throw Error(ErrorKind::kInsufficientSample, "ROBPCA needs n >= 10");
  if (k < 1 || k > std::min(n - 1, q)) {
    throw Error(ErrorKind::kInvalidConfiguration, "ROBPCA needs 1 <= k <= min(n - 1, q)");
  }
  if (!(alpha_h >= 0.5 && alpha_h <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfiguration, "ROBPCA coverage must lie in [0.5, 1]");
  }
  const std::size_t h = std::min(n, static_cast<std::size_t>(std::ceil(alpha_h * static_cast<double>(n))));

  // (1) Affine span of the data.
  const Vector mean = row_mean(x);
  const Matrix centered = x.rowwise() - mean.transpose();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  const double sv_tol = sv.size() > 0 ? sv(0) * 1e-10 : 0.0;
  while (rank < sv.size() && sv(rank) > sv_tol) ++rank;
  RobpcaResult out;
  out.h = h;
  if (rank == 0) {
    out.center = mean;
    out.loadings = Matrix::Zero(static_cast<Eigen::Index>(q), 0);
    out.eigenvalues = Vector::Zero(0);
    out.outlyingness = Vector::Zero(static_cast<Eigen::Index>(n));
    out.weights.assign(n, 1);
    out.rank_reduced = true;
    return out;
  }
  const Matrix span = svd.matrixV().leftCols(rank);
  const Matrix y = centered * span;  // n x r

  // (2) Stahel-Donoho outlyingness over two-point directions.
  std::vector<std::pair<std::size_t, std::size_t>> pairs = options.direction_pairs;
  if (pairs.empty()) {
    const std::size_t all_pairs = n * (n - 1) / 2;
    if (all_pairs <= options.n_directions) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    } else {
      Rng rng(derive_seed(seed, {1}));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      while (pairs.size() < options.n_directions) {
        const std::size_t i = pick(rng), j = pick(rng);
        if (i != j) pairs.emplace_back(i, j);
      }
    }
  }
  Matrix dirs(rank, static_cast<Eigen::Index>(pairs.size()));
  std::vector<char> usable(pairs.size(), 0);
  for (std::size_t d = 0; d < pairs.size(); ++d) {
    const Vector diff = (y.row(static_cast<Eigen::Index>(pairs[d].first)) -
                         y.row(static_cast<Eigen::Index>(pairs[d].second))).transpose();
    const double norm = diff.norm();
    if (norm > 0.0) {
      dirs.col(static_cast<Eigen::Index>(d)) = diff / norm;
      usable[d] = 1;
    } else {
      dirs.col(static_cast<Eigen::Index>(d)).setZero();
    }
  }
  const Matrix proj = y * dirs;
  out.outlyingness = Vector::Zero(static_cast<Eigen::Index>(n));
  std::vector<double> column(n);
  for (std::size_t d = 0; d < pairs.size(); ++d) {
    if (!usable[d]) continue;
    const auto c = static_cast<Eigen::Index>(d);
    for (std::size_t i = 0; i < n; ++i) column[i] = proj(static_cast<Eigen::Index>(i), c);
    const UnivariateMcd u = univariate_mcd(column, h);
    const double scale_floor = 1e-12 * std::max(proj.col(c).cwiseAbs().maxCoeff(), 1e-300);
    if (!(u.scale > scale_floor)) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      out.outlyingness(r) = std::max(out.outlyingness(r), std::abs(proj(r, c) - u.location) / u.scale);
    }
  }

  // (3) Covariance of the h least outlying points.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.outlyingness(static_cast<Eigen::Index>(a)) < out.outlyingness(static_cast<Eigen::Index>(b));
  });
  std::vector<std::size_t> h_subset(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(h));
  std::sort(h_subset.begin(), h_subset.end());
  const Matrix yh = select_rows(y, h_subset);
  const Vector center_h = row_mean(yh);
  const SymEigen eig_h = sym_eigen_desc(covariance(yh));
  Eigen::Index rank_h = 0;
  const double eig_tol = std::max(eig_h.values(0), 0.0) * 1e-12;
  while (rank_h < eig_h.values.size() && eig_h.values(rank_h) > eig_tol) ++rank_h;
  auto k_eff = std::min(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n) - 2);
  if (rank_h < k_eff || k_eff < static_cast<Eigen::Index>(k)) {
    k_eff = std::min(k_eff, rank_h);
    out.rank_reduced = true;
  }
  if (k_eff == 0) {
    out.center = mean + span * center_h;
    out.loadings = Matrix::Zero(static_cast<Eigen::Index>(q), 0);
    out.eigenvalues = Vector::Zero(0);
    out.weights.assign(n, 1);
    return out;
  }
  const Matrix basis_h = eig_h.vectors.leftCols(k_eff);

  // (4) Reweighted MCD of all points projected onto that subspace.
  const Matrix t = (y.rowwise() - center_h.transpose()) * basis_h;
  // The least outlying h-subset also competes as a FastMCD start.
  McdOptions mcd_options = options.mcd;
  mcd_options.extra_starts.push_back(h_subset);
  const McdResult raw = fast_mcd(t, h, derive_seed(seed, {2}), mcd_options);
  const ReweightedMcd rw = reweight_mcd(t, raw, options.reweight_quantile);
  const SymEigen eig_t = sym_eigen_desc(rw.covariance);
  out.eigenvalues = eig_t.values.cwiseMax(0.0);
  out.loadings = span * (basis_h * eig_t.vectors);
  canonicalize_signs(out.loadings);
  out.center = mean + span * (center_h + basis_h * rw.center);
  out.weights = rw.weights;
  return out;
}

}  // namespace romfcc
