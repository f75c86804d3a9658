#include <doctest.h>

#include <cmath>

#include "romfcc/error.hpp"
#include "romfcc/simgen.hpp"

using namespace romfcc;

namespace {

constexpr double kFirstBesselZero = 2.404825557695773;

// Trapezoid integral of the product of two tabulated functions on a uniform grid.
double trapezoid_dot(const Vector& a, const Vector& b) {
  const double h = 1.0 / static_cast<double>(a.size() - 1);
  const Vector prod = a.cwiseProduct(b);
  return h * (prod.sum() - 0.5 * (prod(0) + prod(prod.size() - 1)));
}

}  // namespace

TEST_CASE("Bessel correlation") {
  CHECK(bessel_corr(0.0) == 1.0);
  CHECK(std::abs(bessel_corr(0.125 * kFirstBesselZero)) < 1e-4);
  CHECK(std::abs(bessel_corr(0.125 * kFirstBesselZero)) < 1e-12);
  for (double z : {0.01, 0.1, 0.3, 0.5, 0.77, 1.0}) {
    CHECK(bessel_corr(-z) == bessel_corr(z));
    CHECK(std::abs(bessel_corr(z) - std::cyl_bessel_j(0.0, z / 0.125)) < 1e-12);
    CHECK(std::abs(bessel_corr(z, 0.2, 1.5) - std::cyl_bessel_j(1.5, z / 0.2)) < 1e-12);
  }
}

TEST_CASE("mean curve") {
  CHECK(mean_m(0.0) == doctest::Approx(0.4113938832367146).epsilon(1e-13));
  double max_jump = 0.0;
  double prev = mean_m(0.0);
  for (int i = 1; i <= 10000; ++i) {
    const double v = mean_m(i / 10000.0);
    max_jump = std::max(max_jump, std::abs(v - prev));
    prev = v;
  }
  // Lipschitz bound from the derivative of each term on [0, 1].
  const double slope = 0.3117 * 371.4 + 0.5284 * 0.8217 * std::exp(0.8217) +
                       423.3 * 26.15 * std::pow(1.0 / std::cosh(26.15 * 0.1715), 2);
  CHECK(max_jump <= slope * 1e-4);
  CHECK(max_jump < 0.0125);
  for (double t : {0.051, 0.1, 0.5, 1.0}) CHECK(0.3117 * std::exp(-371.4 * t) < 1e-8);
}

TEST_CASE("expulsion contamination") {
  CHECK(contam_e(0.25, 0.08) == 0.0);
  CHECK(contam_e(0.5, 0.08) == 0.0);
  CHECK(contam_e(0.75, 0.08) == doctest::Approx(-0.04).epsilon(1e-14));
  CHECK(contam_e(1.0, 0.04) == doctest::Approx(-0.04).epsilon(1e-14));
}

TEST_CASE("time warp") {
  for (double mp : {0.0, 0.2, 0.4, 0.54}) {
    CHECK(warp_h(0.03, mp) == 0.03);
    CHECK(warp_h(0.05, mp) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(std::abs(warp_h(1.0, mp) - 1.0) < 1e-12);
    for (double knot : {0.05, 0.6}) {
      CHECK(std::abs(warp_h(std::nextafter(knot, 1.0), mp) - warp_h(knot, mp)) < 1e-12);
    }
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
      const double h = warp_h(i / 1000.0, mp);
      CHECK(h >= prev);
      prev = h;
    }
  }
  CHECK(warp_h(0.6, 0.2) == doctest::Approx(0.4).epsilon(1e-14));
  // The printed form jumps at both breakpoints.
  const double eps = 1e-12;
  CHECK(warp_h(0.05 + eps, 0.2, WarpForm::kVerbatim) - warp_h(0.05, 0.2, WarpForm::kVerbatim) ==
        doctest::Approx(-0.1).epsilon(1e-9));
  CHECK(warp_h(0.6 + eps, 0.2, WarpForm::kVerbatim) - warp_h(0.6, 0.2, WarpForm::kVerbatim) ==
        doctest::Approx(0.1).epsilon(1e-9));
  CHECK_THROWS_AS(warp_h(0.5, 0.55), Error);
  CHECK_THROWS_AS(warp_h(0.5, -0.1), Error);
  CHECK(contam_p(0.3, 0.0) == doctest::Approx(0.0));
  const double t = 0.7, mp = 0.34;
  CHECK(contam_p(t, mp) == doctest::Approx(mean_m(warp_h(t, mp)) - mean_m(t) - mp / 20.0 * t).epsilon(1e-14));
  CHECK(parse_warp_form("verbatim") == WarpForm::kVerbatim);
  CHECK_THROWS_AS(parse_warp_form("other"), Error);
}

TEST_CASE("presets match the parameter tables") {
  struct Row {
    const char* name;
    double ca_e, ca_p, ce_e, ce_p, m_e, m_p;
  };
  const double pt = 0.05;
  const Row rows[] = {
      {"S0", 0, 0, 0, 0, 0, 0},
      {"S1-OutE-C1", 1, 1, pt, 0, 0.04, 0},    {"S1-OutE-C2", 1, 1, pt, 0, 0.06, 0},
      {"S1-OutE-C3", 1, 1, pt, 0, 0.08, 0},    {"S1-OutP-C1", 1, 1, 0, pt, 0, 0.40},
      {"S1-OutP-C2", 1, 1, 0, pt, 0, 0.45},    {"S1-OutP-C3", 1, 1, 0, pt, 0, 0.50},
      {"S2-OutE-C1", pt, 0, 1, 1, 0.02, 0},    {"S2-OutE-C2", pt, 0, 1, 1, 0.03, 0},
      {"S2-OutE-C3", pt, 0, 1, 1, 0.04, 0},    {"S2-OutP-C1", 0, pt, 1, 1, 0, 0.20},
      {"S2-OutP-C2", 0, pt, 1, 1, 0, 0.30},    {"S2-OutP-C3", 0, pt, 1, 1, 0, 0.40},
      {"PhaseII-OCE-SL0", 1, 0, 1, 0, 0.00, 0}, {"PhaseII-OCE-SL1", 1, 0, 1, 0, 0.01, 0},
      {"PhaseII-OCE-SL2", 1, 0, 1, 0, 0.02, 0}, {"PhaseII-OCE-SL3", 1, 0, 1, 0, 0.03, 0},
      {"PhaseII-OCE-SL4", 1, 0, 1, 0, 0.04, 0}, {"PhaseII-OCP-SL0", 0, 1, 0, 1, 0, 0.00},
      {"PhaseII-OCP-SL1", 0, 1, 0, 1, 0, 0.20}, {"PhaseII-OCP-SL2", 0, 1, 0, 1, 0, 0.27},
      {"PhaseII-OCP-SL3", 0, 1, 0, 1, 0, 0.34}, {"PhaseII-OCP-SL4", 0, 1, 0, 1, 0, 0.40},
  };
  CHECK(preset_names().size() == std::size(rows));
  for (const Row& r : rows) {
    CAPTURE(r.name);
    const SimScenario s = scenario_preset(r.name, pt);
    CHECK(s.p_ca_e == r.ca_e);
    CHECK(s.p_ca_p == r.ca_p);
    CHECK(s.p_ce_e == r.ce_e);
    CHECK(s.p_ce_p == r.ce_p);
    CHECK(s.m_e == r.m_e);
    CHECK(s.m_p == r.m_p);
    CHECK(s.p == 10);
    CHECK(s.l_star == 10);
    CHECK(s.sigma == 0.01);
    CHECK(s.sigma_e == 0.0025);
    CHECK(s.grid_size == 100);
  }
  CHECK(scenario_preset("S1-OutE-C3", 0.1).p_ce_e == 0.1);
  CHECK_THROWS_AS(scenario_preset("S3-OutE-C1"), Error);
  CHECK_THROWS_AS(scenario_preset("S0", 1.5), Error);
  SimScenario bad = scenario_preset("S0");
  bad.p_ce_e = -0.1;
  CHECK_THROWS_AS(validate(bad), Error);
  bad = scenario_preset("S0");
  bad.m_p = 0.6;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("eigenstructure against a fully assembled operator") {
  const std::size_t p = 3, l_star = 8, dense = 60;
  const EigenStructure e = build_eigenstructure(p, l_star, 0.125, 0.0, 30, dense);
  const auto g = static_cast<Eigen::Index>(dense);
  const double h = 1.0 / static_cast<double>(dense - 1);
  Vector w = Vector::Constant(g, h);
  w(0) = w(g - 1) = h / 2.0;
  const auto pp = static_cast<Eigen::Index>(p);
  Matrix full(pp * g, pp * g);
  for (Eigen::Index l = 0; l < pp; ++l)
    for (Eigen::Index j = 0; j < pp; ++j)
      for (Eigen::Index a = 0; a < g; ++a)
        for (Eigen::Index b = 0; b < g; ++b) {
          const double k = std::cyl_bessel_j(0.0, std::abs(a - b) * h / 0.125);
          full(l * g + a, j * g + b) =
              std::sqrt(w(a) * w(b)) * k / (1.0 + static_cast<double>(std::abs(l - j)));
        }
  Eigen::SelfAdjointEigenSolver<Matrix> es(full);
  const Vector desc = es.eigenvalues().reverse();
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(l_star); ++i) {
    CHECK(e.lambda(i) == doctest::Approx(desc(i)).epsilon(1e-9));
    if (i > 0) CHECK(e.lambda(i) <= e.lambda(i - 1));
    // The eigenfunction is an eigenvector of the assembled operator.
    Vector v(pp * g);
    for (Eigen::Index l = 0; l < pp; ++l)
      v.segment(l * g, g) = w.cwiseSqrt().cwiseProduct(e.psi_dense[static_cast<std::size_t>(i)].col(l));
    CHECK((full * v - e.lambda(i) * v).norm() < 1e-9);
  }
  // Cross-block damping.
  double prev = INFINITY;
  for (Eigen::Index j = 0; j < pp; ++j) {
    const double f = full.block(0, j * g, g, g).norm();
    CHECK(f < prev);
    prev = f;
  }
}

TEST_CASE("within-component kernel reconstruction and orthonormality") {
  const EigenStructure e = build_eigenstructure(scenario_preset("S0"));
  CHECK(e.eta.size() >= 50);
  for (Eigen::Index k = 0; k < e.eta.size(); ++k) {
    CHECK(e.eta(k) > 0.0);
    if (k > 0) CHECK(e.eta(k) <= e.eta(k - 1));
  }
  const Matrix t50 = e.theta.leftCols(50);
  const Matrix rec = t50 * e.eta.head(50).asDiagonal() * t50.transpose();
  double sup = 0.0;
  const auto& t = e.dense.points();
  for (Eigen::Index a = 0; a < rec.rows(); ++a)
    for (Eigen::Index b = 0; b < rec.cols(); ++b)
      sup = std::max(sup, std::abs(rec(a, b) - bessel_corr(t[static_cast<std::size_t>(a)] - t[static_cast<std::size_t>(b)])));
  CHECK(sup < 1e-3);

  for (std::size_t i = 0; i < e.psi_dense.size(); ++i)
    for (std::size_t k = 0; k < e.psi_dense.size(); ++k) {
      double ip = 0.0;
      for (Eigen::Index j = 0; j < 10; ++j) ip += trapezoid_dot(e.psi_dense[i].col(j), e.psi_dense[k].col(j));
      CHECK(std::abs(ip - (i == k ? 1.0 : 0.0)) < 1e-6);
    }
  // Nystrom values agree with the dense tabulation at shared abscissae.
  const EigenStructure shared = build_eigenstructure(10, 10, 0.125, 0.0, 67, 199);
  for (std::size_t i = 0; i < 10; ++i)
    CHECK((shared.psi_obs[i] - shared.psi_dense[i](Eigen::seq(0, 198, 3), Eigen::all)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("scenario 0 sample: mean and score covariance") {
  SimScenario s = scenario_preset("S0");
  s.n = 5000;
  s.seed = 21;
  const EigenStructure e = build_eigenstructure(s);
  const GeneratedSample g = generate(s, e);
  for (std::size_t c = 0; c < s.n; ++c)
    for (std::size_t j = 0; j < s.p; ++j) {
      CHECK_FALSE(g.labels.cell_e[c][j]);
      CHECK_FALSE(g.labels.cell_p[c][j]);
    }
  Matrix mean = Matrix::Zero(100, 10);
  for (const Matrix& x : g.set.values) mean += x;
  mean /= static_cast<double>(s.n);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 100; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) {
      double var = s.sigma_e * s.sigma_e;
      for (std::size_t l = 0; l < s.l_star; ++l)
        var += s.sigma * s.sigma * e.lambda(static_cast<Eigen::Index>(l)) * std::pow(e.psi_obs[l](i, j), 2);
      const double z = std::abs(mean(i, j) - mean_m(e.obs_grid[static_cast<std::size_t>(i)])) /
                       std::sqrt(var / static_cast<double>(s.n));
      worst = std::max(worst, z);
    }
  CHECK(worst < 4.5);

  // Project the noiseless process part onto the eigenfunctions.
  s.sigma_e = 0.0;
  const GeneratedSample q = generate(s, e);
  const auto l = static_cast<Eigen::Index>(s.l_star);
  Matrix scores(static_cast<Eigen::Index>(s.n), l);
  for (std::size_t c = 0; c < s.n; ++c)
    for (Eigen::Index k = 0; k < l; ++k) {
      double ip = 0.0;
      for (Eigen::Index j = 0; j < 10; ++j) {
        Vector z(100);
        for (Eigen::Index i = 0; i < 100; ++i)
          z(i) = (q.set.values[c](i, j) - mean_m(e.obs_grid[static_cast<std::size_t>(i)])) / s.sigma;
        ip += trapezoid_dot(z, e.psi_obs[static_cast<std::size_t>(k)].col(j));
      }
      scores(static_cast<Eigen::Index>(c), k) = ip;
    }
  const Matrix cov = scores.transpose() * scores / static_cast<double>(s.n);
  for (Eigen::Index k = 0; k < l; ++k) {
    CHECK(std::abs(cov(k, k) / e.lambda(k) - 1.0) < 0.10);
    for (Eigen::Index m = 0; m < k; ++m)
      CHECK(std::abs(cov(k, m)) < 0.10 * std::sqrt(e.lambda(k) * e.lambda(m)));
  }
  // Paired noise: the process part matches the drawn scores.
  CHECK((q.xi - g.xi).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("labels, paired contamination and reproducibility") {
  SimScenario clean = scenario_preset("S0");
  clean.n = 2000;
  clean.seed = 33;
  SimScenario dirty = scenario_preset("S1-OutE-C3");
  dirty.n = 2000;
  dirty.seed = 33;
  const EigenStructure e = build_eigenstructure(clean);
  const GeneratedSample a = generate(clean, e);
  const GeneratedSample b = generate(dirty, e);
  const GeneratedSample b2 = generate(dirty, e);
  std::size_t flagged = 0;
  for (std::size_t c = 0; c < dirty.n; ++c) {
    CHECK(b.labels.case_e[c] == 1);
    CHECK(b.labels.case_p[c] == 1);
    CHECK(b.set.values[c] == b2.set.values[c]);
    for (std::size_t j = 0; j < dirty.p; ++j) {
      CHECK(b.labels.cell_p[c][j] == 0);
      const Vector diff = b.set.values[c].col(static_cast<Eigen::Index>(j)) - a.set.values[c].col(static_cast<Eigen::Index>(j));
      if (b.labels.cell_e[c][j]) {
        ++flagged;
        for (Eigen::Index i = 0; i < 100; ++i) {
          const double t = e.obs_grid[static_cast<std::size_t>(i)];
          CHECK(std::abs(diff(i) - contam_e(t, 0.08)) < 1e-14);
          if (t > 0.5) CHECK(diff(i) < 0.0);
        }
      } else {
        CHECK(diff.cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
  const double cells = static_cast<double>(dirty.n * dirty.p);
  const double frac = static_cast<double>(flagged) / cells;
  CHECK(std::abs(frac - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / cells));

  SimScenario phase = scenario_preset("S2-OutP-C2");
  phase.n = 2000;
  phase.seed = 33;
  const GeneratedSample c = generate(phase, e);
  std::size_t cases = 0;
  for (std::size_t i = 0; i < phase.n; ++i) {
    CHECK(c.labels.case_e[i] == 0);
    cases += static_cast<std::size_t>(c.labels.case_p[i]);
    for (std::size_t j = 0; j < phase.p; ++j) {
      CHECK(c.labels.cell_p[i][j] == c.labels.case_p[i]);
      const Eigen::Index col = static_cast<Eigen::Index>(j);
      const double d = (c.set.values[i].col(col) - a.set.values[i].col(col)).cwiseAbs().maxCoeff();
      CHECK((c.labels.case_p[i] ? d > 0.0 : d == 0.0));
    }
  }
  CHECK(std::abs(static_cast<double>(cases) / 2000.0 - 0.05) < 3.0 * std::sqrt(0.05 * 0.95 / 2000.0));

  SimScenario other = clean;
  other.seed = 34;
  CHECK(generate(other, e).set.values[0] != a.set.values[0]);
}
