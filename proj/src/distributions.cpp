#include "subcoda/distributions.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace subcoda {

double chi_square_quantile(double p, double df) {
  boost::math::chi_squared_distribution<double> dist(df);
  return boost::math::quantile(dist, p);
}

double student_t_cdf(double t, double df) {
  boost::math::students_t_distribution<double> dist(df);
  return boost::math::cdf(dist, t);
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 10.0) return 0.0;
  if (x < 1.18) {
    // Jacobi theta form, fast convergence for small x.
    const double pi = 3.14159265358979323846;
    const double v = pi * pi / (8.0 * x * x);
    double s = 0.0;
    for (int k = 1; k <= 20; k += 2) {
      const double term = std::exp(-static_cast<double>(k) * k * v);
      if (term == 0.0) break;
      s += term;
    }
    const double cdf = std::sqrt(2.0 * pi) / x * s;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double s = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    if (term < 1e-18) break;
    s += sign * term;
    sign = -sign;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

}  // namespace subcoda
