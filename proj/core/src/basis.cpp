#include "romfcc/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "romfcc/error.hpp"

namespace romfcc {
namespace {

constexpr std::array<double, 5> kGaussNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                               0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights = {0.2369268850561891, 0.4786286704993665,
                                                 0.5688888888888889, 0.4786286704993665,
                                                 0.2369268850561891};

int find_span(const std::vector<double>& knots, int degree, int n_basis, double t) {
  if (t >= knots[static_cast<std::size_t>(n_basis)]) return n_basis - 1;
  if (t <= knots[static_cast<std::size_t>(degree)]) return degree;
  const auto it = std::upper_bound(knots.begin(), knots.end(), t);
  const int span = static_cast<int>(it - knots.begin()) - 1;
  return std::clamp(span, degree, n_basis - 1);
}

// Nonzero basis functions and their derivatives at t (de Boor / Cox recursion
// in the triangular-table form). ders[k][j] is the k-th derivative of
// B_{span - degree + j}.
void basis_derivatives(const std::vector<double>& knots, int span, int degree, double t,
                       int n_derivs, std::vector<std::vector<double>>& ders) {
  const int d = degree;
  std::vector<std::vector<double>> ndu(d + 1, std::vector<double>(d + 1, 0.0));
  std::vector<double> left(d + 1, 0.0), right(d + 1, 0.0);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= d; ++j) {
    left[j] = t - knots[span + 1 - j];
    right[j] = knots[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  ders.assign(n_derivs + 1, std::vector<double>(d + 1, 0.0));
  for (int j = 0; j <= d; ++j) ders[0][j] = ndu[j][d];
  const int nd = std::min(n_derivs, d);
  std::vector<std::vector<double>> a(2, std::vector<double>(d + 1, 0.0));
  for (int r = 0; r <= d; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double dd = 0.0;
      const int rk = r - k, pk = d - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        dd = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : d - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        dd += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        dd += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = dd;
      std::swap(s1, s2);
    }
  }
  double factor = d;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= d; ++j) ders[k][j] *= factor;
    factor *= (d - k);
  }
}

// Integrals of products of basis derivatives, exact for polynomial degree <= 9
// on every knot interval.
Matrix integrate_products(const BasisSystem& basis, int derivative) {
  const auto breaks = basis.breakpoints();
  std::vector<double> nodes;
  std::vector<double> weights;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      nodes.push_back(mid + half * kGaussNodes[q]);
      weights.push_back(half * kGaussWeights[q]);
    }
  }
  const Matrix b = eval_basis(basis, nodes, derivative);
  const Eigen::Map<const Vector> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
  const Matrix out = b.transpose() * w.asDiagonal() * b;
  return 0.5 * (out + out.transpose());
}

}  // namespace

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorKind::kInvalidConfiguration, "grid needs at least two points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i] >= 0.0 && points_[i] <= 1.0)) {
      throw Error(ErrorKind::kInvalidConfiguration, "grid points must lie in [0, 1]");
    }
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw Error(ErrorKind::kInvalidConfiguration, "grid points must be strictly increasing");
    }
  }
}

Grid Grid::uniform(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::kInvalidConfiguration, "grid needs at least two points");
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  pts.back() = 1.0;
  return Grid(std::move(pts));
}

const Grid& evaluation_grid() {
  static const Grid grid = Grid::uniform(kEvaluationGridSize);
  return grid;
}

BasisSystem::BasisSystem(int order, std::vector<double> interior_knots, int penalty_order)
    : order_(order),
      penalty_order_(penalty_order < 0 ? std::min(2, order - 1) : penalty_order),
      interior_knots_(std::move(interior_knots)) {
  if (order_ < 2) throw Error(ErrorKind::kInvalidConfiguration, "spline order must be >= 2");
  if (penalty_order_ < 0 || penalty_order_ >= order_) {
    throw Error(ErrorKind::kInvalidConfiguration, "penalty order must be below the spline order");
  }
  double prev = 0.0;
  for (double k : interior_knots_) {
    if (!(k > prev && k < 1.0)) {
      throw Error(ErrorKind::kInvalidConfiguration,
                  "interior knots must be strictly increasing inside (0, 1)");
    }
    prev = k;
  }
  knots_.assign(static_cast<std::size_t>(order_), 0.0);
  knots_.insert(knots_.end(), interior_knots_.begin(), interior_knots_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(order_), 1.0);
}

std::vector<double> BasisSystem::breakpoints() const {
  std::vector<double> out{0.0};
  out.insert(out.end(), interior_knots_.begin(), interior_knots_.end());
  out.push_back(1.0);
  return out;
}

BasisSystem build_basis(int order, int n_basis) {
  if (order < 2) throw Error(ErrorKind::kInvalidConfiguration, "spline order must be >= 2");
  if (n_basis < order) {
    throw Error(ErrorKind::kInvalidConfiguration,
                "n_basis (" + std::to_string(n_basis) + ") must be >= order (" +
                    std::to_string(order) + ")");
  }
  const int n_interior = n_basis - order;
  std::vector<double> knots(static_cast<std::size_t>(n_interior));
  for (int i = 0; i < n_interior; ++i) {
    knots[static_cast<std::size_t>(i)] = static_cast<double>(i + 1) / static_cast<double>(n_interior + 1);
  }
  return BasisSystem(order, std::move(knots));
}

Matrix eval_basis(const BasisSystem& basis, std::span<const double> t, int derivative) {
  const int degree = basis.order() - 1;
  const int k = basis.n_basis();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(t.size()), k);
  if (derivative > degree) return out;
  std::vector<std::vector<double>> ders;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = std::clamp(t[i], 0.0, 1.0);
    const int span = find_span(basis.knots(), degree, k, x);
    basis_derivatives(basis.knots(), span, degree, x, derivative, ders);
    for (int j = 0; j <= degree; ++j) {
      out(static_cast<Eigen::Index>(i), span - degree + j) = ders[derivative][j];
    }
  }
  return out;
}

Matrix eval_basis(const BasisSystem& basis, const Grid& grid) {
  return eval_basis(basis, grid.points(), 0);
}

GramMatrix GramMatrix::from_matrix(const Matrix& w) {
  if (w.rows() != w.cols() || w.rows() == 0) {
    throw Error(ErrorKind::kShapeError, "Gram matrix must be square and non-empty");
  }
  GramMatrix g;
  g.w_ = 0.5 * (w + w.transpose());
  const SymEigen eig = sym_eigen_desc(g.w_);
  const double top = eig.values(0);
  const double bottom = eig.values(eig.values.size() - 1);
  if (!(top > 0.0) || bottom < 1e-12 * top) {
    throw Error(ErrorKind::kDegenerateBasis, "Gram matrix is numerically singular");
  }
  const Vector floored = eig.values.cwiseMax(1e-12 * top);
  g.half_ = eig.vectors * floored.cwiseSqrt().asDiagonal() * eig.vectors.transpose();
  g.half_inv_ =
      eig.vectors * floored.cwiseSqrt().cwiseInverse().asDiagonal() * eig.vectors.transpose();
  g.half_ = 0.5 * (g.half_ + g.half_.transpose()).eval();
  g.half_inv_ = 0.5 * (g.half_inv_ + g.half_inv_.transpose()).eval();
  return g;
}

GramMatrix gram(const BasisSystem& basis) {
  return GramMatrix::from_matrix(integrate_products(basis, 0));
}

Matrix penalty_matrix(const BasisSystem& basis) {
  return integrate_products(basis, basis.penalty_order());
}

double inner_product_h(const Matrix& a, const Matrix& b, const GramMatrix& w) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::kShapeError, "inner product operands differ in shape");
  }
  if (a.rows() != w.size()) {
    throw Error(ErrorKind::kShapeError, "coefficient length does not match the Gram matrix");
  }
  return (a.transpose() * w.w() * b).trace();
}

CurveEvaluator::CurveEvaluator(const BasisSystem& basis, const Grid& grid)
    : design_(eval_basis(basis, grid)) {
  if (grid.size() < static_cast<std::size_t>(basis.n_basis())) {
    throw Error(ErrorKind::kRankDeficientFit, "evaluation grid is coarser than the basis");
  }
  const Matrix normal = design_.transpose() * design_;
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::kRankDeficientFit, "basis is not identifiable on the evaluation grid");
  }
  projector_ = llt.solve(design_.transpose());
}

std::vector<double> gcv_lambda_grid() {
  std::vector<double> out(25);
  for (int i = 0; i < 25; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, -10.0 + 0.5 * i);
  return out;
}

Smoother::Smoother(BasisSystem basis, Grid grid)
    : basis_(std::move(basis)), grid_(std::move(grid)) {
  design_ = eval_basis(basis_, grid_);
  normal_ = design_.transpose() * design_;
  penalty_ = penalty_matrix(basis_);
  Eigen::LLT<Matrix> llt(normal_);
  normal_pd_ = llt.info() == Eigen::Success && llt.rcond() > 1e-13 &&
               grid_.size() >= static_cast<std::size_t>(basis_.n_basis());
  if (normal_pd_) {
    // L^{-1} P L^{-T} = U diag(s) U^T  =>  (A + lambda P)^{-1} = T diag(1/(1+lambda s)) T^T
    const Matrix l_inv = llt.matrixL().solve(Matrix::Identity(normal_.rows(), normal_.cols()));
    const Matrix m = l_inv * penalty_ * l_inv.transpose();
    const SymEigen eig = sym_eigen_desc(0.5 * (m + m.transpose()));
    spectrum_ = eig.values.cwiseMax(0.0);
    // The penalty annihilates polynomials of degree below the penalty order exactly.
    const Eigen::Index null_dim = basis_.penalty_order();
    spectrum_.tail(std::min(null_dim, spectrum_.size())).setZero();
    transform_ = l_inv.transpose() * eig.vectors;
  }
}

Smoother::Fit Smoother::fit(std::span<const double> y, std::optional<double> lambda) const {
  if (y.size() != grid_.size()) {
    throw Error(ErrorKind::kShapeError, "observation count does not match the grid");
  }
  if (lambda && *lambda < 0.0) {
    throw Error(ErrorKind::kInvalidConfiguration, "smoothing parameter must be non-negative");
  }
  const Vector yv = Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size()));
  if (normal_pd_) return fit_reinsch(yv, lambda);
  if (lambda && *lambda == 0.0) {
    throw Error(ErrorKind::kRankDeficientFit, "normal equations are singular at lambda = 0");
  }
  return fit_direct(yv, lambda);
}

Smoother::Fit Smoother::fit_reinsch(const Vector& y, std::optional<double> lambda) const {
  const Vector b = transform_.transpose() * (design_.transpose() * y);
  const auto shrink = [&](double lam) {
    return (1.0 + lam * spectrum_.array()).inverse().matrix().eval();
  };
  const double n = static_cast<double>(y.size());
  Fit best;
  if (lambda) {
    best.lambda = *lambda;
  } else {
    // RSS(lambda) = ||y - Q b||^2 + sum_k (b_k lambda s_k / (1 + lambda s_k))^2
    const double base_rss = (y - design_ * (transform_ * b)).squaredNorm();
    double best_score = std::numeric_limits<double>::infinity();
    for (double lam : gcv_lambda_grid()) {
      const Vector f = shrink(lam);
      const double rss = base_rss + (b.array() * (1.0 - f.array())).square().sum();
      const double dof = f.sum();
      const double denom = n - dof;
      if (denom <= 1e-8 * n) continue;
      const double score = n * rss / (denom * denom);
      if (score < best_score) {
        best_score = score;
        best.lambda = lam;
      }
    }
    best.gcv = best_score;
  }
  best.coefs = transform_ * shrink(best.lambda).cwiseProduct(b);
  return best;
}

Smoother::Fit Smoother::fit_direct(const Vector& y, std::optional<double> lambda) const {
  const Vector rhs = design_.transpose() * y;
  const double n = static_cast<double>(y.size());
  const auto solve = [&](double lam, double* gcv) -> std::optional<FdCoef> {
    const Matrix lhs = normal_ + lam * penalty_;
    Eigen::LDLT<Matrix> ldlt(lhs);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) return std::nullopt;
    FdCoef c = ldlt.solve(rhs);
    if (gcv) {
      const double dof = ldlt.solve(normal_).trace();
      const double denom = n - dof;
      const double rss = (y - design_ * c).squaredNorm();
      *gcv = denom > 1e-8 * n ? n * rss / (denom * denom) : std::numeric_limits<double>::infinity();
    }
    return c;
  };
  Fit best;
  if (lambda) {
    auto c = solve(*lambda, nullptr);
    if (!c) throw Error(ErrorKind::kRankDeficientFit, "penalized normal equations are singular");
    best.coefs = *c;
    best.lambda = *lambda;
    return best;
  }
  best.gcv = std::numeric_limits<double>::infinity();
  for (double lam : gcv_lambda_grid()) {
    double score = 0.0;
    auto c = solve(lam, &score);
    if (c && score < best.gcv) {
      best.gcv = score;
      best.lambda = lam;
      best.coefs = *c;
    }
  }
  if (best.coefs.size() == 0) {
    throw Error(ErrorKind::kRankDeficientFit, "no smoothing parameter gives a solvable fit");
  }
  return best;
}

FdCoef smooth_curve(std::span<const double> y, const Grid& grid, const BasisSystem& basis,
                    std::optional<double> lambda) {
  return Smoother(basis, grid).fit(y, lambda).coefs;
}

}  // namespace romfcc
