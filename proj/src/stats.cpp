#include "subcoda/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "subcoda/distributions.hpp"
#include "subcoda/rng.hpp"

namespace subcoda {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
  double s = 0.0;
  for (const double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

void require_size(std::span<const double> v, std::size_t min, const char* what) {
  if (v.size() < min) {
    throw Error(fmt::format("{} needs at least {} observations, got {}", what, min,
                            v.size()));
  }
}

/// Mid-ranks: 1-based ranks with ties averaged.
std::vector<double> mid_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size(), 0.0);
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double two_sided_t_p(double t, double df) {
  const double p = 2.0 * student_t_cdf(-std::abs(t), df);
  return std::clamp(p, 0.0, 1.0);
}

struct OlsCore {
  double slope, intercept, sxx, ssr, sst;
};

OlsCore ols_core(std::span<const double> x, std::span<const double> y) {
  const double xm = mean_of(x);
  const double ym = mean_of(y);
  double sxx = 0.0, sxy = 0.0, sst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    sst += (y[i] - ym) * (y[i] - ym);
  }
  if (sxx == 0.0) throw Error("ols: x is constant");
  const double slope = sxy / sxx;
  const double intercept = ym - slope * xm;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ssr += r * r;
  }
  return {slope, intercept, sxx, ssr, sst};
}

}  // namespace

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "ks_two_sample");
  require_size(b, 2, "ks_two_sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  double d = 0.0;
  std::size_t ia = 0, ib = 0;
  while (ia < sa.size() && ib < sb.size()) {
    const double v = std::min(sa[ia], sb[ib]);
    while (ia < sa.size() && sa[ia] <= v) ++ia;
    while (ib < sb.size() && sb[ib] <= v) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na -
                             static_cast<double>(ib) / nb));
  }
  const double n_eff = na * nb / (na + nb);
  return {d, kolmogorov_sf(std::sqrt(n_eff) * d), "kolmogorov-smirnov"};
}

TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "welch_t_test");
  require_size(b, 2, "welch_t_test");
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) {
    // identical constant samples: no evidence of difference
    return {0.0, 1.0, "welch-t"};
  }
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  return {t, two_sided_t_p(t, df), "welch-t"};
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  require_size(a, 2, "cohens_d");
  require_size(b, 2, "cohens_d");
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
  if (pooled == 0.0) throw Error("cohens_d: zero pooled variance");
  return (ma - mb) / std::sqrt(pooled);
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: length mismatch");
  require_size(x, 3, "pearson");
  const double xm = mean_of(x), ym = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    syy += (y[i] - ym) * (y[i] - ym);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance input");
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double n = static_cast<double>(x.size());
  if (1.0 - r * r <= 0.0) return {r, 0.0};
  const double t = r * std::sqrt((n - 2.0) / (1.0 - r * r));
  return {r, two_sided_t_p(t, n - 2.0)};
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  require_size(x, 3, "spearman");
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  return pearson(rx, ry);
}

RegressionResult ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("ols: length mismatch");
  require_size(x, 3, "ols");
  const auto core = ols_core(x, y);
  RegressionResult result;
  result.slope = core.slope;
  result.intercept = core.intercept;
  result.n = x.size();
  result.r_squared = core.sst == 0.0 ? 1.0 : std::clamp(1.0 - core.ssr / core.sst, 0.0, 1.0);
  const double n = static_cast<double>(x.size());
  if (core.ssr == 0.0) {
    // exact fit: a zero slope carries no evidence, a nonzero one is certain
    result.p_value = core.slope == 0.0 ? 1.0 : 0.0;
    return result;
  }
  const double se = std::sqrt(core.ssr / (n - 2.0) / core.sxx);
  result.p_value = two_sided_t_p(core.slope / se, n - 2.0);
  return result;
}

BootstrapCI bootstrap_slope_ci(std::span<const double> x, std::span<const double> y,
                               std::size_t n_resamples, double level,
                               std::uint64_t seed) {
  if (x.size() != y.size()) throw Error("bootstrap_slope_ci: length mismatch");
  require_size(x, 5, "bootstrap_slope_ci");
  if (n_resamples < 2) throw Error("bootstrap_slope_ci: need >= 2 resamples");
  if (!(level > 0.0 && level < 1.0)) throw Error("bootstrap_slope_ci: bad level");

  constexpr int kMaxRetries = 100;
  const std::size_t n = x.size();
  std::vector<double> slopes(n_resamples, 0.0);
  std::vector<double> rx(n), ry(n);
  for (std::size_t i = 0; i < n_resamples; ++i) {
    Rng rng(Rng::derive(seed, i));
    bool done = false;
    for (int attempt = 0; attempt < kMaxRetries && !done; ++attempt) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t pick = static_cast<std::size_t>(rng.next_below(n));
        rx[j] = x[pick];
        ry[j] = y[pick];
      }
      const bool constant = std::all_of(rx.begin(), rx.end(),
                                        [&](double v) { return v == rx[0]; });
      if (constant) continue;
      slopes[i] = ols_core(rx, ry).slope;
      done = true;
    }
    if (!done) {
      throw Error("bootstrap_slope_ci: resamples kept degenerating to constant x");
    }
  }
  std::sort(slopes.begin(), slopes.end());

  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(slopes.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
    const double frac = pos - std::floor(pos);
    return slopes[lo] * (1.0 - frac) + slopes[hi] * frac;
  };
  const double tail = (1.0 - level) / 2.0;
  return {level, quantile(tail), quantile(1.0 - tail), n_resamples, seed};
}

WithinBetween within_between(const DistanceMatrix& matrix,
                             const std::vector<std::string>& labels) {
  if (labels.size() != matrix.size()) {
    throw Error("within_between: one label per matrix item required");
  }
  WithinBetween out;
  const std::size_t n = matrix.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = matrix.symmetric ? i + 1 : 0; j < n; ++j) {
      if (i == j) continue;
      (labels[i] == labels[j] ? out.within : out.between).push_back(matrix.at(i, j));
    }
  }
  return out;
}

}  // namespace subcoda
