#pragma once

// Synthetic multivariate dynamic-resistance-curve style data: a Bessel
// correlation eigenstructure with damped cross-correlation between components,
// a fixed mean curve, and expulsion / phase-shift contamination switched on by
// case-level and cell-level Bernoulli draws.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "romfcc/curves.hpp"

namespace romfcc {

/// (x/2)^nu sum_j (-x^2/4)^j / (j! Gamma(nu + j + 1)) with x = |z| / rho.
double bessel_corr(double z, double rho = 0.125, double nu = 0.0);

enum class WarpForm { kCorrected, kVerbatim };

std::string to_string(WarpForm form);
WarpForm parse_warp_form(const std::string& name);

struct SimScenario {
  std::string name = "custom";
  std::size_t p = 10;
  std::size_t l_star = 10;
  double rho = 0.125;
  double nu = 0.0;
  double sigma = 0.01;
  double sigma_e = 0.0025;
  double p_ca_e = 0.0;
  double p_ca_p = 0.0;
  double p_ce_e = 0.0;
  double p_ce_p = 0.0;
  double m_e = 0.0;
  double m_p = 0.0;
  std::size_t n = 100;
  std::size_t grid_size = 100;
  std::uint64_t seed = 0;
  WarpForm warp = WarpForm::kCorrected;
};

/// Throws invalid-configuration or invalid-severity.
void validate(const SimScenario& s);

inline constexpr std::size_t kDenseGridSize = 200;

struct EigenStructure {
  Grid dense = Grid::uniform(kDenseGridSize);
  Vector quad_weights;  // trapezoid weights on the dense grid
  Vector eta;           // within-component eigenvalues, non-increasing
  Matrix theta;         // dense grid x n_eta, orthonormal under the weights
  Vector cross_values;  // eigenvalues of the damping matrix 1 / (1 + |l - j|)
  Matrix cross_vectors;
  Vector lambda;                  // L_star, non-increasing
  std::vector<Matrix> psi_dense;  // L_star matrices, dense grid x p
  Grid obs_grid = Grid::uniform(100);
  std::vector<Matrix> psi_obs;  // L_star matrices, observation grid x p
};

/// Eigenpairs of the p-component correlation operator whose diagonal blocks
/// are the Bessel kernel and whose (l, j) block is sum_k eta_k / (1 + |l - j|)
/// theta_k(s) theta_k(t). Both factors are discretized with trapezoid
/// weights; values on the observation grid are Nystrom extensions.
EigenStructure build_eigenstructure(std::size_t p, std::size_t l_star, double rho, double nu,
                                    std::size_t grid_size, std::size_t dense_size = kDenseGridSize);
EigenStructure build_eigenstructure(const SimScenario& s);

double mean_m(double t);
double contam_e(double t, double m_e);
/// Time warp; throws invalid-severity unless 0 <= m_p < 0.55.
double warp_h(double t, double m_p, WarpForm form = WarpForm::kCorrected);
double contam_p(double t, double m_p, WarpForm form = WarpForm::kCorrected);

struct CellLabels {
  std::vector<char> case_e;  // per case: B_CaE
  std::vector<char> case_p;  // per case: B_CaP
  std::vector<std::vector<char>> cell_e;  // per case and component: B_CaE * B_CeE
  std::vector<std::vector<char>> cell_p;  // per case and component: B_CaP * B_CeP
};

struct GeneratedSample {
  CurveSet set;
  CellLabels labels;
  Matrix xi;  // n x L_star true scores
};

/// Each case draws, from its own stream derive_seed(seed, {case}), the scores,
/// both case Bernoullis, both sets of cell Bernoullis and the noise, in that
/// order and regardless of the probabilities, so that scenarios sharing a seed
/// share their uncontaminated part.
GeneratedSample generate(const SimScenario& s, const EigenStructure& eig);
GeneratedSample generate(const SimScenario& s);

/// Valid preset names.
const std::vector<std::string>& preset_names();

/// Throws unknown-preset (with the list of valid names) for other names.
SimScenario scenario_preset(const std::string& name, double p_tilde = 0.05);

}  // namespace romfcc
