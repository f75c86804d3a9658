#include "romfcc/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

#include "romfcc/error.hpp"
#include "romfcc/rng.hpp"

namespace romfcc {

double bessel_corr(double z, double rho, double nu) {
  const double x = std::abs(z) / rho;
  const double q = -x * x / 4.0;
  double term = 1.0 / std::tgamma(nu + 1.0);
  double sum = term;
  for (int j = 1; j < 500; ++j) {
    term *= q / (static_cast<double>(j) * (nu + static_cast<double>(j)));
    sum += term;
    if (static_cast<double>(j) > -q && std::abs(term) < 1e-17) break;
  }
  return nu == 0.0 ? sum : std::pow(x / 2.0, nu) * sum;
}

std::string to_string(WarpForm form) { return form == WarpForm::kCorrected ? "corrected" : "verbatim"; }

WarpForm parse_warp_form(const std::string& name) {
  if (name == "corrected") return WarpForm::kCorrected;
  if (name == "verbatim") return WarpForm::kVerbatim;
  throw Error(ErrorKind::kInvalidConfiguration,
              "unknown warp form '" + name + "' (expected corrected or verbatim)");
}

void validate(const SimScenario& s) {
  for (double prob : {s.p_ca_e, s.p_ca_p, s.p_ce_e, s.p_ce_p}) {
    if (!(prob >= 0.0 && prob <= 1.0)) {
      throw Error(ErrorKind::kInvalidConfiguration, "probabilities must lie in [0, 1]");
    }
  }
  if (s.p == 0 || s.l_star == 0 || s.grid_size < 2) {
    throw Error(ErrorKind::kInvalidConfiguration, "p, L* and the grid size must be positive");
  }
  if (!(s.sigma >= 0.0 && s.sigma_e >= 0.0 && s.rho > 0.0 && s.nu >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfiguration, "invalid scale or Bessel parameters");
  }
  if (!(s.m_e >= 0.0)) throw Error(ErrorKind::kInvalidSeverity, "M_E must be non-negative");
  if (!(s.m_p >= 0.0 && s.m_p < 0.55)) {
    throw Error(ErrorKind::kInvalidSeverity, "M_P must lie in [0, 0.55)");
  }
}

EigenStructure build_eigenstructure(std::size_t p, std::size_t l_star, double rho, double nu,
                                    std::size_t grid_size, std::size_t dense_size) {
  if (p == 0 || l_star == 0 || dense_size < 2 || grid_size < 2) {
    throw Error(ErrorKind::kInvalidConfiguration, "invalid eigenstructure dimensions");
  }
  EigenStructure e;
  e.dense = Grid::uniform(dense_size);
  e.obs_grid = Grid::uniform(grid_size);
  const auto g = static_cast<Eigen::Index>(dense_size);
  const auto& t = e.dense.points();
  const double step = 1.0 / static_cast<double>(dense_size - 1);
  e.quad_weights = Vector::Constant(g, step);
  e.quad_weights(0) = e.quad_weights(g - 1) = step / 2.0;

  Matrix kernel(g, g);
  for (Eigen::Index i = 0; i < g; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      kernel(i, j) = kernel(j, i) = bessel_corr(t[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)], rho, nu);
  const Vector sw = e.quad_weights.cwiseSqrt();
  const Matrix weighted = sw.asDiagonal() * kernel * sw.asDiagonal();
  const SymEigen ke = sym_eigen_desc(weighted);
  if (ke.values.minCoeff() < -1e-8) {
    throw Error(ErrorKind::kConstructionError, "discretized Bessel kernel is not positive semidefinite");
  }
  Eigen::Index n_eta = 0;
  while (n_eta < g && ke.values(n_eta) > 0.0) ++n_eta;
  e.eta = ke.values.head(n_eta);
  e.theta = sw.cwiseInverse().asDiagonal() * ke.vectors.leftCols(n_eta);
  canonicalize_signs(e.theta);

  const auto pp = static_cast<Eigen::Index>(p);
  Matrix damping(pp, pp);
  for (Eigen::Index l = 0; l < pp; ++l)
    for (Eigen::Index j = 0; j < pp; ++j) damping(l, j) = 1.0 / (1.0 + static_cast<double>(std::abs(l - j)));
  const SymEigen de = sym_eigen_desc(damping);
  if (de.values.minCoeff() < -1e-8) {
    throw Error(ErrorKind::kConstructionError, "cross-correlation damping is not positive semidefinite");
  }
  e.cross_values = de.values.cwiseMax(0.0);
  e.cross_vectors = de.vectors;
  canonicalize_signs(e.cross_vectors);

  // The assembled operator is the Kronecker product damping x kernel, so its
  // eigenpairs are products of the factors' eigenpairs.
  std::vector<std::tuple<double, Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index a = 0; a < pp; ++a)
    for (Eigen::Index k = 0; k < n_eta; ++k) pairs.emplace_back(e.cross_values(a) * e.eta(k), a, k);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
  if (pairs.size() < l_star) throw Error(ErrorKind::kConstructionError, "fewer eigenpairs than L*");

  // Nystrom extension of the within-component eigenfunctions to the
  // observation grid.
  const auto go = static_cast<Eigen::Index>(grid_size);
  Matrix cross_kernel(go, g);
  for (Eigen::Index i = 0; i < go; ++i)
    for (Eigen::Index j = 0; j < g; ++j)
      cross_kernel(i, j) = bessel_corr(e.obs_grid[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(j)], rho, nu);

  e.lambda.resize(static_cast<Eigen::Index>(l_star));
  for (std::size_t i = 0; i < l_star; ++i) {
    const auto [value, a, k] = pairs[i];
    e.lambda(static_cast<Eigen::Index>(i)) = value;
    const Vector theta_obs =
        cross_kernel * e.quad_weights.cwiseProduct(e.theta.col(k)) / e.eta(k);
    e.psi_dense.push_back(e.theta.col(k) * e.cross_vectors.col(a).transpose());
    e.psi_obs.push_back(theta_obs * e.cross_vectors.col(a).transpose());
  }
  return e;
}

EigenStructure build_eigenstructure(const SimScenario& s) {
  return build_eigenstructure(s.p, s.l_star, s.rho, s.nu, s.grid_size);
}

namespace {

double mean_terms(double t) {
  return 0.2074 + 0.3117 * std::exp(-371.4 * t) + 0.5284 * (1.0 - std::exp(0.8217 * t)) -
         423.3 * (1.0 + std::tanh(-26.15 * (t + 0.1715)));
}

}  // namespace

double mean_m(double t) { return mean_terms(t); }

double contam_e(double t, double m_e) { return std::min(0.0, -2.0 * m_e * (t - 0.5)); }

double warp_h(double t, double m_p, WarpForm form) {
  if (!(m_p >= 0.0 && m_p < 0.55)) throw Error(ErrorKind::kInvalidSeverity, "M_P must lie in [0, 0.55)");
  if (t <= 0.05) return t;
  const double a = (0.55 - m_p) / 0.55;
  if (t <= 0.6) {
    return form == WarpForm::kCorrected ? 0.05 + (t - 0.05) * a : a * t - (1.0 + a) * 0.05;
  }
  const double b = (0.4 + m_p) / 0.4;
  return b * t + 1.0 - b;
}

double contam_p(double t, double m_p, WarpForm form) {
  return -mean_terms(t) - (m_p / 20.0) * t + mean_terms(warp_h(t, m_p, form));
}

GeneratedSample generate(const SimScenario& s, const EigenStructure& eig) {
  validate(s);
  if (eig.psi_obs.size() != s.l_star || eig.obs_grid.size() != s.grid_size ||
      (s.l_star > 0 && static_cast<std::size_t>(eig.psi_obs.front().cols()) != s.p)) {
    throw Error(ErrorKind::kShapeError, "eigenstructure does not match the scenario");
  }
  const auto g = static_cast<Eigen::Index>(s.grid_size);
  const auto p = static_cast<Eigen::Index>(s.p);
  Vector mean(g), ce(g), cp(g);
  for (Eigen::Index i = 0; i < g; ++i) {
    const double t = eig.obs_grid[static_cast<std::size_t>(i)];
    mean(i) = mean_m(t);
    ce(i) = contam_e(t, s.m_e);
    cp(i) = contam_p(t, s.m_p, s.warp);
  }
  GeneratedSample out;
  out.set.grid = eig.obs_grid;
  out.set.p = s.p;
  out.xi.resize(static_cast<Eigen::Index>(s.n), static_cast<Eigen::Index>(s.l_star));
  CellLabels& lab = out.labels;
  lab.case_e.assign(s.n, 0);
  lab.case_p.assign(s.n, 0);
  lab.cell_e.assign(s.n, std::vector<char>(s.p, 0));
  lab.cell_p.assign(s.n, std::vector<char>(s.p, 0));
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t c = 0; c < s.n; ++c) {
    Rng rng(derive_seed(s.seed, {c}));
    Matrix x = mean.replicate(1, p);
    for (std::size_t l = 0; l < s.l_star; ++l) {
      const double xi = std::sqrt(eig.lambda(static_cast<Eigen::Index>(l))) * normal(rng);
      out.xi(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(l)) = xi;
      x += (s.sigma * xi) * eig.psi_obs[l];
    }
    const bool ca_e = uniform(rng) < s.p_ca_e;
    const bool ca_p = uniform(rng) < s.p_ca_p;
    std::vector<char> ce_cells(s.p), cp_cells(s.p);
    for (std::size_t j = 0; j < s.p; ++j) ce_cells[j] = uniform(rng) < s.p_ce_e;
    for (std::size_t j = 0; j < s.p; ++j) cp_cells[j] = uniform(rng) < s.p_ce_p;
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < g; ++i) x(i, j) += s.sigma_e * normal(rng);
    lab.case_e[c] = ca_e;
    lab.case_p[c] = ca_p;
    for (std::size_t j = 0; j < s.p; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      lab.cell_e[c][j] = ca_e && ce_cells[j];
      lab.cell_p[c][j] = ca_p && cp_cells[j];
      if (lab.cell_e[c][j]) x.col(col) += ce;
      if (lab.cell_p[c][j]) x.col(col) += cp;
    }
    out.set.case_ids.push_back(std::to_string(c));
    out.set.values.push_back(std::move(x));
  }
  return out;
}

GeneratedSample generate(const SimScenario& s) {
  validate(s);
  return generate(s, build_eigenstructure(s));
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v{"S0"};
    for (const char* s : {"S1", "S2"})
      for (const char* o : {"OutE", "OutP"})
        for (int c = 1; c <= 3; ++c) v.push_back(std::string(s) + "-" + o + "-C" + std::to_string(c));
    for (const char* oc : {"OCE", "OCP"})
      for (int sl = 0; sl <= 4; ++sl) v.push_back(std::string("PhaseII-") + oc + "-SL" + std::to_string(sl));
    return v;
  }();
  return names;
}

SimScenario scenario_preset(const std::string& name, double p_tilde) {
  if (!(p_tilde >= 0.0 && p_tilde <= 1.0)) {
    throw Error(ErrorKind::kInvalidConfiguration, "p-tilde must lie in [0, 1]");
  }
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw Error(ErrorKind::kUnknownPreset, "unknown preset '" + name + "'; valid presets: " + valid);
  }
  SimScenario s;
  s.name = name;
  if (name == "S0") return s;
  if (name.rfind("PhaseII-", 0) == 0) {
    const bool oc_e = name.find("OCE") != std::string::npos;
    const int sl = name.back() - '0';
    static constexpr double kMe[] = {0.00, 0.01, 0.02, 0.03, 0.04};
    static constexpr double kMp[] = {0.00, 0.20, 0.27, 0.34, 0.40};
    if (oc_e) {
      s.p_ca_e = s.p_ce_e = 1.0;
      s.m_e = kMe[sl];
    } else {
      s.p_ca_p = s.p_ce_p = 1.0;
      s.m_p = kMp[sl];
    }
    return s;
  }
  const bool scenario1 = name.rfind("S1", 0) == 0;
  const bool out_e = name.find("OutE") != std::string::npos;
  const int level = name.back() - '1';
  if (scenario1) {
    static constexpr double kMe[] = {0.04, 0.06, 0.08};
    static constexpr double kMp[] = {0.40, 0.45, 0.50};
    s.p_ca_e = s.p_ca_p = 1.0;
    if (out_e) {
      s.p_ce_e = p_tilde;
      s.m_e = kMe[level];
    } else {
      s.p_ce_p = p_tilde;
      s.m_p = kMp[level];
    }
  } else {
    static constexpr double kMe[] = {0.02, 0.03, 0.04};
    static constexpr double kMp[] = {0.20, 0.30, 0.40};
    s.p_ce_e = s.p_ce_p = 1.0;
    if (out_e) {
      s.p_ca_e = p_tilde;
      s.m_e = kMe[level];
    } else {
      s.p_ca_p = p_tilde;
      s.m_p = kMp[level];
    }
  }
  return s;
}

}  // namespace romfcc
