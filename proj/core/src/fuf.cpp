#include "romfcc/fuf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "romfcc/error.hpp"
#include "romfcc/rng.hpp"
#include "romfcc/stats.hpp"

namespace romfcc {

FufDistances fuf_distances(const Matrix& curves, std::shared_ptr<const FunctionalSpace> space,
                           double variance_target, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(curves.cols());
  if (n < 10) throw Error(ErrorKind::kInsufficientSample, "filter needs at least 10 curves");
  CurveSample sample;
  sample.reserve(n);
  for (Eigen::Index i = 0; i < curves.cols(); ++i) sample.push_back(MultiCurve::complete(curves.col(i)));
  FufDistances out;
  out.distances = Vector::Zero(static_cast<Eigen::Index>(n));
  try {
    const MfpcaModel model = fit_mfpca(sample, std::move(space), Flavor::kRobust, variance_target, seed);
    out.l_fil = model.L;
    const Vector inv_lambda = model.lambda.head(static_cast<Eigen::Index>(model.L)).cwiseInverse();
    for (std::size_t i = 0; i < n; ++i) {
      const Vector xi = scores(model, sample[i], model.L);
      out.distances(static_cast<Eigen::Index>(i)) = xi.cwiseAbs2().dot(inv_lambda);
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumericDegenerate) throw;
    out.degenerate = true;
    out.l_fil = 1;
  }
  return out;
}

CellFlags flag_cells(const Vector& distances, std::size_t l_fil, double alpha) {
  CellFlags out;
  const auto n = static_cast<std::size_t>(distances.size());
  if (n == 0 || l_fil == 0) return out;
  const double nd = static_cast<double>(n);
  const double dof = static_cast<double>(l_fil);
  const double eta = chi2_quantile(dof, alpha);
  std::vector<double> sorted(distances.data(), distances.data() + n);
  std::sort(sorted.begin(), sorted.end());
  // Boundary term at eta: G(eta) - G_n(eta).
  auto first_above = std::upper_bound(sorted.begin(), sorted.end(), eta);
  double sup = alpha - static_cast<double>(first_above - sorted.begin()) / nd;
  // Left limits at each jump d_(i) > eta: G(d_(i)) - #(d < d_(i)) / n.
  for (auto it = first_above; it != sorted.end(); ++it) {
    if (it != first_above && *it == *(it - 1)) continue;
    const double below = static_cast<double>(it - sorted.begin());
    sup = std::max(sup, chi2_cdf(dof, *it) - below / nd);
  }
  out.d_n = std::clamp(sup, 0.0, 1.0);
  const auto count = static_cast<std::size_t>(std::floor(nd * out.d_n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return distances(static_cast<Eigen::Index>(a)) > distances(static_cast<Eigen::Index>(b));
  });
  out.flagged.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

FilterResult apply_filter(const CurveSample& curves, std::shared_ptr<const FunctionalSpace> space,
                          double variance_target, double alpha, std::uint64_t seed) {
  if (curves.empty()) throw Error(ErrorKind::kInsufficientSample, "empty sample");
  const std::size_t n = curves.size();
  const std::size_t p = curves.front().p();
  for (const auto& c : curves) {
    if (!c.is_complete()) throw Error(ErrorKind::kIncompleteObservation, "filter needs complete cases");
  }
  FilterResult out;
  FilterReport& rep = out.report;
  rep.alpha = alpha;
  rep.distances = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  rep.flagged.resize(p);
  rep.d_n = Vector::Zero(static_cast<Eigen::Index>(p));
  rep.l_fil.assign(p, 0);
  std::vector<std::size_t> flag_count(n, 0);
  CurveSample masked = curves;
  const auto k = static_cast<Eigen::Index>(space->basis.n_basis());
  for (std::size_t j = 0; j < p; ++j) {
    Matrix block(k, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      block.col(static_cast<Eigen::Index>(i)) = curves[i].coefs.col(static_cast<Eigen::Index>(j));
    }
    const FufDistances d = fuf_distances(block, space, variance_target, derive_seed(seed, {j}));
    rep.distances.col(static_cast<Eigen::Index>(j)) = d.distances;
    rep.l_fil[j] = d.l_fil;
    const CellFlags f = flag_cells(d.distances, d.l_fil, alpha);
    rep.d_n(static_cast<Eigen::Index>(j)) = f.d_n;
    rep.flagged[j] = f.flagged;
    for (std::size_t i : f.flagged) {
      masked[i].observed[j] = 0;
      ++flag_count[i];
    }
  }
  rep.tombstoned.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (flag_count[i] == p) {
      rep.tombstoned[i] = 1;
      continue;
    }
    out.kept.push_back(i);
    out.curves.push_back(std::move(masked[i]));
  }
  return out;
}

}  // namespace romfcc
