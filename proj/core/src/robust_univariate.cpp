#include "romfcc/robust_univariate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "romfcc/error.hpp"
#include "romfcc/stats.hpp"

namespace romfcc {

MedianMad scalar_median_mad(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorKind::kInsufficientSample, "median/MAD needs >= 2 values");
  MedianMad out;
  out.location = median(std::vector<double>(x.begin(), x.end()));
  std::vector<double> dev(x.size());
  std::transform(x.begin(), x.end(), dev.begin(),
                 [&](double v) { return std::abs(v - out.location); });
  out.scale = kMadConsistency * median(std::move(dev));
  out.degenerate = !(out.scale > 0.0);
  return out;
}

HuberLocation huber_location(std::span<const double> x) {
  const MedianMad start = scalar_median_mad(x);
  HuberLocation out{start.location, true};
  if (start.degenerate) return out;
  const double k = kHuberTuning * start.scale;
  double mu = start.location;
  out.converged = false;
  for (int it = 0; it < kHuberMaxIterations; ++it) {
    double num = 0.0, den = 0.0;
    for (double v : x) {
      const double r = std::abs(v - mu);
      const double w = r <= k ? 1.0 : k / r;
      num += w * v;
      den += w;
    }
    const double next = num / den;
    const double step = std::abs(next - mu);
    mu = next;
    if (step <= kHuberTolerance * start.scale) {
      out.converged = true;
      break;
    }
  }
  out.location = mu;
  return out;
}

FunctionalMean functional_m_mean(const Matrix& curves, const CurveEvaluator& evaluator) {
  if (curves.cols() < 3) {
    throw Error(ErrorKind::kInsufficientSample, "functional M-estimator needs >= 3 curves");
  }
  const Matrix values = evaluator.evaluate(curves);  // grid x n
  Vector pointwise(values.rows());
  FunctionalMean out;
  std::vector<double> row(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    for (Eigen::Index i = 0; i < values.cols(); ++i) row[static_cast<std::size_t>(i)] = values(t, i);
    const HuberLocation h = huber_location(row);
    pointwise(t) = h.location;
    out.converged = out.converged && h.converged;
  }
  out.coefs = evaluator.project(pointwise);
  return out;
}

FunctionalMean functional_m_mean(const Matrix& curves, const BasisSystem& basis,
                                 const Grid& grid) {
  return functional_m_mean(curves, CurveEvaluator(basis, grid));
}

FunctionalScale functional_nmad_scale(const Matrix& curves, const FdCoef& mu,
                                      const CurveEvaluator& evaluator) {
  if (curves.cols() < 3) {
    throw Error(ErrorKind::kInsufficientSample, "functional nMAD needs >= 3 curves");
  }
  const Matrix values = evaluator.evaluate(curves);
  const Vector center = evaluator.evaluate(mu);
  FunctionalScale out;
  out.values.resize(values.rows());
  std::vector<double> dev(static_cast<std::size_t>(values.cols()));
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    for (Eigen::Index i = 0; i < values.cols(); ++i) {
      dev[static_cast<std::size_t>(i)] = std::abs(values(t, i) - center(t));
    }
    const double s = kMadConsistency * median(dev);
    out.values(t) = s * s;
  }
  const double top = out.values.maxCoeff();
  if (!(top > 0.0)) {
    out.degenerate = true;
    out.values.setConstant(1e-12);
    return out;
  }
  out.values = out.values.cwiseMax(1e-12 * top);
  return out;
}

FunctionalScale functional_nmad_scale(const Matrix& curves, const FdCoef& mu,
                                      const BasisSystem& basis, const Grid& grid) {
  return functional_nmad_scale(curves, mu, CurveEvaluator(basis, grid));
}

}  // namespace romfcc
