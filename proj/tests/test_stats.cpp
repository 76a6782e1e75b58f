#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "subcoda/distributions.hpp"
#include "subcoda/rng.hpp"
#include "subcoda/stats.hpp"

using namespace subcoda;

namespace {

std::vector<double> gaussian(std::size_t n, double mean, double sd, Rng& rng) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(mean + sd * rng.next_gaussian());
  return out;
}

}  // namespace

TEST_CASE("kolmogorov survival function reference values") {
  CHECK(kolmogorov_sf(0.3) == doctest::Approx(0.999990694199).epsilon(1e-9));
  CHECK(kolmogorov_sf(0.5) == doctest::Approx(0.963945243665).epsilon(1e-9));
  CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.269999671677).epsilon(1e-9));
  CHECK(kolmogorov_sf(2.0) == doctest::Approx(0.000670925256).epsilon(1e-6));
  CHECK(kolmogorov_sf(0.0) == 1.0);
}

TEST_CASE("ks statistic and p-value behave per the examples") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{2.0, 3.0, 4.0};
  CHECK(ks_two_sample(a, b).statistic == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(oracle::ks_statistic(a, b) == doctest::Approx(1.0 / 3.0));

  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, a).p_value == 1.0);

  Rng rng(3);
  const auto lo = gaussian(50, 0.5, 0.02, rng);
  const auto hi = gaussian(50, 10.5, 0.02, rng);
  const auto disjoint = ks_two_sample(lo, hi);
  CHECK(disjoint.statistic == 1.0);
  CHECK(disjoint.p_value < 1e-10);

  // two-sided symmetry and oracle agreement on random inputs
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = gaussian(30, 0.0, 1.0, rng);
    const auto y = gaussian(40, 0.2, 1.2, rng);
    const auto xy = ks_two_sample(x, y);
    const auto yx = ks_two_sample(y, x);
    CHECK(xy.statistic == doctest::Approx(oracle::ks_statistic(x, y)).epsilon(1e-12));
    CHECK(xy.p_value == doctest::Approx(yx.p_value).epsilon(1e-12));
  }

  CHECK_THROWS_AS(ks_two_sample(std::vector<double>{1.0}, b), Error);
}

TEST_CASE("welch t test matches an external reference") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 3, 4, 5, 6, 7};
  const auto r = welch_t_test(a, b);
  CHECK(r.statistic == doctest::Approx(-1.4411533842457842).epsilon(1e-10));
  CHECK(r.p_value == doctest::Approx(0.18345224495316034).epsilon(1e-8));
  CHECK(welch_t_test(b, a).p_value == doctest::Approx(r.p_value).epsilon(1e-12));
}

TEST_CASE("effect size on planted shifts") {
  Rng rng(5);
  const auto base = gaussian(30, 0.0, 1.0, rng);
  std::vector<double> shifted;
  for (const double v : base) shifted.push_back(v + 10.0);
  CHECK(cohens_d(shifted, base) == doctest::Approx(10.0).epsilon(0.25));
  CHECK(welch_t_test(shifted, base).p_value < 1e-12);

  const auto other = gaussian(30, 0.0, 1.0, rng);
  CHECK(std::abs(cohens_d(base, other)) < 1.0);
  std::vector<double> equal_means{1, 2, 3};
  CHECK(cohens_d(equal_means, equal_means) == 0.0);

  const std::vector<double> constant{2, 2, 2};
  CHECK_THROWS_AS(cohens_d(constant, constant), Error);
}

TEST_CASE("pearson and spearman correlations") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK(pearson(x, x).coefficient == doctest::Approx(1.0));
  CHECK(spearman(x, x).coefficient == doctest::Approx(1.0));

  const std::vector<double> y{1, 3, 2, 4};
  const auto p = pearson(x, y);
  CHECK(p.coefficient == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(p.p_value == doctest::Approx(0.2).epsilon(1e-9));

  // monotone nonlinear: perfect rank correlation, imperfect linear one
  std::vector<double> cubic;
  for (const double v : x) cubic.push_back(-v * v * v);
  CHECK(spearman(x, cubic).coefficient == doctest::Approx(-1.0));
  CHECK(std::abs(pearson(x, cubic).coefficient) < 1.0);

  const auto sp = spearman(std::vector<double>{1, 2, 3, 4, 5},
                           std::vector<double>{1, 3, 2, 5, 4});
  CHECK(sp.coefficient == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(sp.p_value == doctest::Approx(0.10408803866182788).epsilon(1e-8));

  CHECK_THROWS_AS(pearson(std::vector<double>{1, 1, 1}, x), Error);

  // invariance under positive affine maps and monotone transforms
  Rng rng(7);
  const auto u = gaussian(25, 0.0, 1.0, rng);
  const auto v = gaussian(25, 1.0, 2.0, rng);
  std::vector<double> u2, v2;
  for (const double a : u) u2.push_back(3.0 * a + 7.0);
  for (const double b : v) v2.push_back(std::exp(b));
  CHECK(pearson(u2, v).coefficient ==
        doctest::Approx(pearson(u, v).coefficient).epsilon(1e-9));
  CHECK(spearman(u, v2).coefficient ==
        doctest::Approx(spearman(u, v).coefficient).epsilon(1e-12));
}

TEST_CASE("ols recovers an exact line") {
  const std::vector<double> x{0, 1, 2, 3, 4};
  std::vector<double> y;
  for (const double v : x) y.push_back(2.0 * v + 1.0);
  const auto r = ols(x, y);
  CHECK(r.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.r_squared == doctest::Approx(1.0));
  CHECK(r.p_value == 0.0);
  CHECK_THROWS_AS(ols(std::vector<double>{1, 1, 1}, y), Error);
}

TEST_CASE("ols residuals are orthogonal to x") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = gaussian(50, 0.0, 2.0, rng);
    std::vector<double> y;
    for (const double v : x) y.push_back(-1.5 * v + rng.next_gaussian());
    const auto r = ols(x, y);
    double dot = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double resid = y[i] - (r.intercept + r.slope * x[i]);
      dot += resid * x[i];
      scale += std::abs(resid * x[i]);
    }
    CHECK(std::abs(dot) <= 1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("ols slope test is calibrated under the null") {
  Rng rng(11);
  int rejections = 0;
  const int trials = 400;
  for (int trial = 0; trial < trials; ++trial) {
    const auto x = gaussian(100, 0.0, 1.0, rng);
    const auto y = gaussian(100, 0.0, 1.0, rng);
    rejections += ols(x, y).p_value < 0.05;
  }
  const double rate = static_cast<double>(rejections) / trials;
  CHECK(rate > 0.02);
  CHECK(rate < 0.09);
}

TEST_CASE("planted negative slope is recovered on overlap-like design") {
  // geometry similar to the 21 undirected clan pairs
  std::vector<double> x;
  Rng rng(13);
  for (int i = 0; i < 21; ++i) x.push_back(0.26 + 0.74 * rng.next_double());
  std::vector<double> y;
  for (const double v : x) y.push_back(-3.0 * v + 0.5 * rng.next_gaussian());
  const auto r = ols(x, y);
  CHECK(r.slope == doctest::Approx(-3.0).epsilon(0.17));
  CHECK(r.p_value < 0.01);
}

TEST_CASE("bootstrap CI collapses on exact data and is reproducible") {
  const std::vector<double> x{0, 1, 2, 3, 4, 5};
  std::vector<double> y;
  for (const double v : x) y.push_back(-2.0 * v + 3.0);
  const auto ci = bootstrap_slope_ci(x, y, 200, 0.95, 7);
  CHECK(ci.lower == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(ci.upper == doctest::Approx(-2.0).epsilon(1e-12));

  Rng rng(15);
  const auto gx = gaussian(40, 0.0, 1.0, rng);
  std::vector<double> gy;
  for (const double v : gx) gy.push_back(-3.0 * v + 0.5 * rng.next_gaussian());
  const auto c1 = bootstrap_slope_ci(gx, gy, 500, 0.95, 21);
  const auto c2 = bootstrap_slope_ci(gx, gy, 500, 0.95, 21);
  CHECK(c1.lower == c2.lower);  // bit-identical per seed
  CHECK(c1.upper == c2.upper);
  CHECK(c1.upper < 0.0);  // strongly negative slope

  const auto noise = bootstrap_slope_ci(gx, gaussian(40, 0.0, 1.0, rng), 500, 0.95, 23);
  CHECK(noise.lower < 0.0);
  CHECK(noise.upper > 0.0);

  // nearly-degenerate x exercises the resample retry path
  const std::vector<double> spike_x{1, 1, 1, 1, 2};
  const std::vector<double> spike_y{0, 0, 0, 0, 1};
  const auto spiked = bootstrap_slope_ci(spike_x, spike_y, 100, 0.95, 3);
  CHECK(spiked.lower <= spiked.upper);
}

TEST_CASE("within/between splits pairs by label") {
  DistanceMatrix m;
  m.labels = {"a1", "a2", "b1", "b2"};
  m.symmetric = true;
  m.values = {
      {0.0, 0.1, 0.9, 0.8},
      {0.1, 0.0, 0.7, 0.6},
      {0.9, 0.7, 0.0, 0.2},
      {0.8, 0.6, 0.2, 0.0},
  };
  const auto wb = within_between(m, {"A", "A", "B", "B"});
  CHECK(wb.within.size() == 2);
  CHECK(wb.between.size() == 4);
  CHECK(wb.within == std::vector<double>{0.1, 0.2});

  const auto all_same = within_between(m, {"A", "A", "A", "A"});
  CHECK(all_same.between.empty());
  CHECK(all_same.within.size() == 6);

  CHECK_THROWS_AS(within_between(m, {"A", "B"}), Error);

  m.symmetric = false;  // asymmetric matrices contribute both directions
  const auto both = within_between(m, {"A", "A", "B", "B"});
  CHECK(both.within.size() == 4);
  CHECK(both.between.size() == 8);
}

TEST_CASE("chi-square quantiles agree with the independent oracle") {
  for (const double df : {1.0, 5.0, 20.0, 100.0}) {
    for (const double p : {0.5, 0.9, 0.95, 0.99}) {
      CHECK(chi_square_quantile(p, df) ==
            doctest::Approx(oracle::chi_square_quantile(p, df)).epsilon(1e-7));
    }
  }
}
