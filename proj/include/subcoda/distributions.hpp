#pragma once

namespace subcoda {

/// p-quantile of the chi-square distribution with df degrees of freedom.
double chi_square_quantile(double p, double df);

/// CDF of Student's t distribution with df degrees of freedom.
double student_t_cdf(double t, double df);

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_sf(double x);

}  // namespace subcoda
