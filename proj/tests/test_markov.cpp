#include <doctest.h>

#include <cmath>

#include "planted.hpp"
#include "subcoda/markov.hpp"
#include "subcoda/rng.hpp"

using namespace subcoda;

namespace {

SymbolStream stream_of(std::vector<Symbol> symbols, std::size_t n) {
  return SymbolStream::over_alphabet(std::move(symbols), n);
}

CodaSample sample_from_icis(const std::vector<std::vector<double>>& codas) {
  CodaSample s{"s", std::nullopt, {}};
  int i = 0;
  for (const auto& icis : codas) {
    s.records.push_back(CodaRecord{"c" + std::to_string(i++), "s", {}, {}, {}, {}, icis});
  }
  return s;
}

}  // namespace

TEST_CASE("order zero is the symbol frequency table") {
  const auto model = fit_fixed(stream_of({0, 0, 0, 1}, 2), 0);
  CHECK(model.history_count() == 1);
  CHECK(model.probability({}, 0) == doctest::Approx(0.75));
  CHECK(model.probability({}, 1) == doctest::Approx(0.25));
}

TEST_CASE("order one on an alternating stream is deterministic") {
  const auto model = fit_fixed(stream_of({0, 1, 0, 1}, 2), 1);
  const std::vector<Symbol> h0{0}, h1{1};
  CHECK(model.probability(h0, 1) == 1.0);
  CHECK(model.probability(h1, 0) == 1.0);
  CHECK(model.probability(h0, 0) == 0.0);
}

TEST_CASE("high-order conditionals of iid data stay near the marginal") {
  Rng rng(5);
  std::vector<Symbol> symbols;
  for (int i = 0; i < 40000; ++i) {
    symbols.push_back(rng.next_double() < 0.7 ? 0 : 1);
  }
  const auto model = fit_fixed(stream_of(symbols, 2), 3);
  double worst = 0.0;
  for (const auto& [hist, entry] : model.table()) {
    if (entry.total < 500) continue;
    for (const auto& [sym, count] : entry.next) {
      const double p = static_cast<double>(count) / static_cast<double>(entry.total);
      const double target = sym == 0 ? 0.7 : 0.3;
      worst = std::max(worst, std::abs(p - target));
    }
  }
  CHECK(worst < 0.05);
}

TEST_CASE("stream too short for the order errors") {
  CHECK_THROWS_AS(fit_fixed(stream_of({0, 1}, 2), 2), Error);
  CHECK_THROWS_AS(fit_fixed(stream_of({0, 1, 0}, 2), -1), Error);
}

TEST_CASE("scan statistics on a deterministic period-3 stream") {
  std::vector<Symbol> symbols;
  while (symbols.size() < 9000) {
    symbols.insert(symbols.end(), {0, 1, 2});
  }
  const auto rows = scan_orders(stream_of(symbols, 3), 0, 3);
  for (const auto& row : rows) {
    if (row.order >= 2) {
      CHECK(row.nonzero_per_history == 1.0);
      CHECK(row.mean_probability == 1.0);
      CHECK(row.var_probability == 0.0);
    }
  }
  // mean probability at order 0 for a balanced stream
  CHECK(rows[0].mean_probability == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iid uniform data has mean probability 1/n at order zero") {
  Rng rng(6);
  std::vector<Symbol> symbols;
  for (int i = 0; i < 20000; ++i) {
    symbols.push_back(static_cast<Symbol>(rng.next_below(4)));
  }
  const auto rows = scan_orders(stream_of(symbols, 4), 0, 0);
  CHECK(rows[0].mean_probability == doctest::Approx(0.25));
}

TEST_CASE("the planted order-3 chain bifurcates at h=3") {
  int aic_ok = 0, var_ok = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stream = planted::order3_stream(5000, 700 + seed);
    const auto rows = scan_orders(stream, 0, 4);
    std::size_t aic_arg = 0, var_arg = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].aic < rows[aic_arg].aic) aic_arg = i;
      if (rows[i].var_probability > rows[var_arg].var_probability) var_arg = i;
    }
    aic_ok += rows[aic_arg].order == 3;
    var_ok += rows[var_arg].order == 2 || rows[var_arg].order == 3;
  }
  CHECK(aic_ok == 5);
  CHECK(var_ok == 5);
}

TEST_CASE("training log likelihood never decreases with the order") {
  const auto stream = planted::order3_stream(2000, 9);
  double previous = -std::numeric_limits<double>::infinity();
  for (int h = 0; h <= 5; ++h) {
    const auto model = fit_fixed(stream, h);
    const double ll = model.log_likelihood(stream.symbols);
    CHECK(ll >= previous - 1e-9);
    previous = ll;
  }
}

TEST_CASE("resolution difference is exactly zero on a one-symbol stream") {
  // every ICI is at or above t_max, so everything maps to the end symbol
  std::vector<std::vector<double>> codas;
  for (int i = 0; i < 50; ++i) codas.push_back({1.5, 1.7, 1.9});
  const auto rows = resolution_scan(sample_from_icis(codas), {0.05}, 1.0);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].difference == 0.0);
}

TEST_CASE("a near-constant stream gains nothing over order zero") {
  // at delta_t = t_max every ICI lands in bin 0 and codas are long, so the
  // stream is almost all zeros; the rare end symbol carries too little
  // evidence to clear the threshold
  Rng rng(13);
  std::vector<std::vector<double>> codas;
  for (int i = 0; i < 50; ++i) {
    codas.push_back(std::vector<double>(40 + rng.next_below(20), 0.4));
  }
  const auto rows = resolution_scan(sample_from_icis(codas), {1.0}, 1.0);
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(rows[0].difference) < 5.0);
}

TEST_CASE("a sub-bin rhythm pushes the best resolution below it") {
  // alternating 0.06/0.09 ICIs collapse into one bin at delta_t >= 0.05
  Rng rng(21);
  std::vector<std::vector<double>> codas;
  for (int i = 0; i < 400; ++i) {
    std::vector<double> icis;
    std::size_t j = 0;
    do {
      icis.push_back(j++ % 2 == 0 ? 0.06 : 0.09);
    } while (rng.next_double() > 0.25 && icis.size() < 40);
    codas.push_back(std::move(icis));
  }
  const auto sample = sample_from_icis(codas);
  const auto rows = resolution_scan(sample, {0.01, 0.03, 0.05, 0.1}, 1.0);
  CHECK(best_resolution(rows) < 0.05);
}

TEST_CASE("fine resolutions beat a half-second binning on structured data") {
  Rng rng(22);
  std::vector<std::vector<double>> codas;
  for (int i = 0; i < 400; ++i) {
    std::vector<double> icis;
    std::size_t j = 0;
    do {
      icis.push_back(j++ % 2 == 0 ? 0.12 : 0.24);
    } while (rng.next_double() > 0.25 && icis.size() < 40);
    codas.push_back(std::move(icis));
  }
  const auto sample = sample_from_icis(codas);
  const auto rows = resolution_scan(sample, {0.01, 0.02, 0.05, 0.1, 0.5}, 1.0);
  REQUIRE(rows.size() == 5);
  const double coarse = rows.back().difference;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    CHECK(rows[i].difference < coarse);
  }
}
