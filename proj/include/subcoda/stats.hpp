#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subcoda/metric.hpp"
#include "subcoda/types.hpp"

namespace subcoda {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::string method;
};

/// Two-sided Kolmogorov-Smirnov test. The p-value is asymptotic, using the
/// Kolmogorov distribution with effective n = |a||b|/(|a|+|b|).
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Welch's t test with Welch-Satterthwaite degrees of freedom.
TestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Cohen's d with the df-weighted pooled standard deviation.
double cohens_d(std::span<const double> a, std::span<const double> b);

struct Correlation {
  double coefficient = 0.0;
  double p_value = 1.0;
};

Correlation pearson(std::span<const double> x, std::span<const double> y);
/// Pearson correlation of mid-ranks (ties get averaged ranks).
Correlation spearman(std::span<const double> x, std::span<const double> y);

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double p_value = 1.0;  // two-sided, slope != 0, t with n-2 df
  std::size_t n = 0;
};

RegressionResult ols(std::span<const double> x, std::span<const double> y);

struct BootstrapCI {
  double level = 0.95;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n_resamples = 1000;
  std::uint64_t seed = 0;
};

/// Percentile CI of the OLS slope over seeded resamples with replacement.
/// Each resample uses a seed derived from (seed, index), so results do not
/// depend on evaluation order. A resample with constant x is redrawn, up to
/// a retry cap.
BootstrapCI bootstrap_slope_ci(std::span<const double> x, std::span<const double> y,
                               std::size_t n_resamples = 1000, double level = 0.95,
                               std::uint64_t seed = 0);

struct WithinBetween {
  std::vector<double> within;
  std::vector<double> between;
};

/// Splits off-diagonal distances by whether the two items share a label.
/// Symmetric matrices contribute each unordered pair once; asymmetric ones
/// contribute both directions.
WithinBetween within_between(const DistanceMatrix& matrix,
                             const std::vector<std::string>& labels);

}  // namespace subcoda
