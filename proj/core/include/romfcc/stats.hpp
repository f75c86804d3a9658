#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace romfcc {

// Thin wrappers over Boost.Math so the rest of the library does not depend on
// its headers directly.
double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);
double chi2_cdf(double dof, double x);
double chi2_quantile(double dof, double p);

inline constexpr double kMadConsistency = 1.4826;

/// Median of a sample; the input is taken by value and partially reordered.
double median(std::vector<double> x);

/// Sample quantile with linear interpolation between order statistics
/// (R type 7).
double sample_quantile(std::vector<double> x, double q);

double mean(std::span<const double> x);

/// Unbiased sample variance.
double variance(std::span<const double> x);

}  // namespace romfcc
