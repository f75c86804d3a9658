#include "romfcc/mfpca.hpp"

#include <algorithm>
#include <cmath>

#include "romfcc/error.hpp"
#include "romfcc/robpca.hpp"
#include "romfcc/robust_univariate.hpp"

namespace romfcc {

std::string to_string(Flavor flavor) {
  return flavor == Flavor::kRobust ? "robust" : "classical";
}

Flavor parse_flavor(const std::string& name) {
  if (name == "robust") return Flavor::kRobust;
  if (name == "classical") return Flavor::kClassical;
  throw Error(ErrorKind::kInvalidConfiguration,
              "unknown flavor '" + name + "' (expected robust or classical)");
}

LocationScale fit_location_scale(const CurveSample& curves, const FunctionalSpace& space,
                                 Flavor flavor) {
  if (curves.empty()) throw Error(ErrorKind::kInsufficientSample, "no curves");
  const std::size_t p = curves.front().p();
  const auto k = static_cast<Eigen::Index>(space.basis.n_basis());
  const auto g = static_cast<Eigen::Index>(space.evaluator.grid_size());
  LocationScale out{Matrix(k, static_cast<Eigen::Index>(p)), Matrix(g, static_cast<Eigen::Index>(p))};
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<const MultiCurve*> present;
    for (const auto& c : curves) {
      if (c.p() != p) throw Error(ErrorKind::kShapeError, "cases differ in component count");
      if (c.observed[j]) present.push_back(&c);
    }
    if (present.size() < 3) {
      throw Error(ErrorKind::kInsufficientSample,
                  "component " + std::to_string(j) + " has fewer than 3 observed curves");
    }
    Matrix block(k, static_cast<Eigen::Index>(present.size()));
    for (std::size_t i = 0; i < present.size(); ++i) {
      block.col(static_cast<Eigen::Index>(i)) = present[i]->coefs.col(static_cast<Eigen::Index>(j));
    }
    const auto col = static_cast<Eigen::Index>(j);
    if (flavor == Flavor::kRobust) {
      out.mu.col(col) = functional_m_mean(block, space.evaluator).coefs;
      out.v.col(col) = functional_nmad_scale(block, out.mu.col(col), space.evaluator).values;
    } else {
      out.mu.col(col) = block.rowwise().mean();
      const Matrix values = space.evaluator.evaluate(block);
      const Vector mean = space.evaluator.evaluate(out.mu.col(col));
      Vector var = (values.colwise() - mean).rowwise().squaredNorm() /
                   static_cast<double>(block.cols() - 1);
      const double top = var.maxCoeff();
      var = top > 0.0 ? var.cwiseMax(1e-12 * top).eval() : Vector::Constant(g, 1e-12);
      out.v.col(col) = var;
    }
  }
  return out;
}

MultiCurve standardize(const MultiCurve& curve, const LocationScale& ls,
                       const FunctionalSpace& space) {
  MultiCurve out = curve;
  for (Eigen::Index j = 0; j < curve.coefs.cols(); ++j) {
    if (!curve.observed[static_cast<std::size_t>(j)]) continue;
    const Vector diff = curve.coefs.col(j) - ls.mu.col(j);
    const Vector values = space.evaluator.evaluate(diff).cwiseQuotient(ls.v.col(j).cwiseSqrt());
    out.coefs.col(j) = space.evaluator.project(values);
  }
  return out;
}

MultiCurve unstandardize(const MultiCurve& z, const LocationScale& ls,
                         const FunctionalSpace& space) {
  MultiCurve out = z;
  for (Eigen::Index j = 0; j < z.coefs.cols(); ++j) {
    if (!z.observed[static_cast<std::size_t>(j)]) continue;
    // Exact inverse of the standardization map P diag(v^{-1/2}) E, where E
    // evaluates on the grid and P = (E^T E)^{-1} E^T projects back.
    const Matrix& e = space.evaluator.design();
    const Matrix forward = e.transpose() * ls.v.col(j).cwiseSqrt().cwiseInverse().asDiagonal() * e;
    const Vector rhs = e.transpose() * (e * z.coefs.col(j));
    out.coefs.col(j) = ls.mu.col(j) + forward.ldlt().solve(rhs);
  }
  return out;
}

std::size_t select_dimension(const Vector& lambda, double variance_target) {
  if (lambda.size() == 0) return 0;
  const double total = lambda.sum();
  double acc = 0.0;
  for (Eigen::Index l = 0; l < lambda.size(); ++l) {
    acc += lambda(l);
    if (acc >= variance_target * total * (1.0 - 1e-12)) return static_cast<std::size_t>(l + 1);
  }
  return static_cast<std::size_t>(lambda.size());
}

Matrix block_diag(const Matrix& block, std::size_t p) {
  const Eigen::Index k = block.rows();
  Matrix out = Matrix::Zero(k * static_cast<Eigen::Index>(p), k * static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) out.block(j * k, j * k, k, k) = block;
  return out;
}

namespace {

// Applies a block-diagonal matrix with identical k x k blocks to stacked columns.
Matrix apply_blocks(const Matrix& block, const Matrix& stacked) {
  const Eigen::Index k = block.rows();
  Matrix out(stacked.rows(), stacked.cols());
  for (Eigen::Index j = 0; j * k < stacked.rows(); ++j) {
    out.middleRows(j * k, k) = block * stacked.middleRows(j * k, k);
  }
  return out;
}

}  // namespace

Matrix y_covariance(const std::vector<Vector>& stacked_z, Flavor flavor, std::uint64_t seed,
                    const FunctionalSpace& space) {
  const auto n = static_cast<Eigen::Index>(stacked_z.size());
  if (n < 10) throw Error(ErrorKind::kInsufficientSample, "MFPCA needs at least 10 complete cases");
  const Eigen::Index q = stacked_z.front().size();
  Matrix c(q, n);
  for (Eigen::Index i = 0; i < n; ++i) c.col(i) = stacked_z[static_cast<std::size_t>(i)];
  const Matrix y = apply_blocks(space.w.half(), c).transpose();  // n x q
  if (flavor == Flavor::kClassical) return covariance(y);
  const auto k = static_cast<std::size_t>(std::min(n - 1, q));
  const RobpcaResult r = robpca(y, k, 0.75, seed);
  return r.loadings * r.eigenvalues.asDiagonal() * r.loadings.transpose();
}

MfpcaModel mfpca_from_covariance(std::shared_ptr<const FunctionalSpace> space,
                                 LocationScale loc_scale, const Matrix& y_cov, std::size_t cap,
                                 double variance_target, Flavor flavor, std::uint64_t seed) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfiguration, "variance target must lie in (0, 1]");
  }
  MfpcaModel m;
  m.p = static_cast<std::size_t>(loc_scale.mu.cols());
  m.loc_scale = std::move(loc_scale);
  m.flavor = flavor;
  m.seed = seed;
  const SymEigen eig = sym_eigen_desc(0.5 * (y_cov + y_cov.transpose()));
  Eigen::Index keep = 0;
  const double top = eig.values.size() > 0 ? eig.values(0) : 0.0;
  const auto limit = std::min<Eigen::Index>(static_cast<Eigen::Index>(cap), eig.values.size());
  while (keep < limit && top > 0.0 && eig.values(keep) > 1e-12 * top) ++keep;
  if (keep == 0) throw Error(ErrorKind::kNumericDegenerate, "covariance has no positive eigenvalue");
  m.lambda = eig.values.head(keep);
  Matrix b = apply_blocks(space->w.half_inv(), eig.vectors.leftCols(keep));
  // Re-orthonormalize in the H inner product (Cholesky form of Gram-Schmidt).
  const Matrix wb = apply_blocks(space->w.w(), b);
  const Matrix gram_b = b.transpose() * wb;
  Eigen::LLT<Matrix> llt(0.5 * (gram_b + gram_b.transpose()));
  if (llt.info() == Eigen::Success) {
    b = llt.matrixU().transpose().solve(b.transpose()).transpose();
  }
  m.b = b;
  m.wb = apply_blocks(space->w.w(), m.b);
  m.L = select_dimension(m.lambda, variance_target);
  m.space = std::move(space);
  return m;
}

MfpcaModel fit_mfpca(const CurveSample& curves, std::shared_ptr<const FunctionalSpace> space,
                     Flavor flavor, double variance_target, std::uint64_t seed) {
  if (curves.size() < 10) throw Error(ErrorKind::kInsufficientSample, "MFPCA needs n >= 10");
  for (const auto& c : curves) {
    if (!c.is_complete()) throw Error(ErrorKind::kIncompleteObservation, "MFPCA needs complete cases");
  }
  LocationScale ls = fit_location_scale(curves, *space, flavor);
  std::vector<Vector> z;
  z.reserve(curves.size());
  for (const auto& c : curves) z.push_back(stack(standardize(c, ls, *space).coefs));
  const Matrix cov = y_covariance(z, flavor, seed, *space);
  const std::size_t cap = std::min(curves.size() - 1, static_cast<std::size_t>(z.front().size()));
  return mfpca_from_covariance(std::move(space), std::move(ls), cov, cap, variance_target, flavor,
                               seed);
}

Vector scores_standardized(const MfpcaModel& model, const Vector& z_stacked, std::size_t l_use) {
  if (l_use > model.l_max()) {
    throw Error(ErrorKind::kInvalidConfiguration, "requested more components than the model has");
  }
  if (z_stacked.size() != model.wb.rows()) {
    throw Error(ErrorKind::kShapeError, "curve does not match the model basis");
  }
  return model.wb.leftCols(static_cast<Eigen::Index>(l_use)).transpose() * z_stacked;
}

Vector scores(const MfpcaModel& model, const MultiCurve& curve, std::size_t l_use) {
  if (!curve.is_complete()) {
    throw Error(ErrorKind::kIncompleteObservation, "scores need all components observed");
  }
  if (curve.p() != model.p || curve.coefs.rows() != model.k()) {
    throw Error(ErrorKind::kShapeError, "curve does not match the model basis");
  }
  return scores_standardized(model, stack(standardize(curve, model.loc_scale, *model.space).coefs),
                             l_use);
}

double h_norm_sq(const MfpcaModel& model, const Vector& z_stacked) {
  return z_stacked.dot(apply_blocks(model.space->w.w(), z_stacked).col(0));
}

double residual_norm_sq(const MfpcaModel& model, const Vector& z_stacked, std::size_t l_use) {
  const Vector xi = scores_standardized(model, z_stacked, l_use);
  const Vector r = z_stacked - model.b.leftCols(static_cast<Eigen::Index>(l_use)) * xi;
  return h_norm_sq(model, r);
}

MultiCurve reconstruct(const MfpcaModel& model, const Vector& xi) {
  if (static_cast<std::size_t>(xi.size()) > model.l_max()) {
    throw Error(ErrorKind::kInvalidConfiguration, "more scores than model components");
  }
  const Vector z = model.b.leftCols(xi.size()) * xi;
  return unstandardize(MultiCurve::complete(unstack(z, model.k())), model.loc_scale, *model.space);
}

}  // namespace romfcc
