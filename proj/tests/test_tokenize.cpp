#include <doctest.h>

#include "planted.hpp"
#include "subcoda/rng.hpp"
#include "subcoda/tokenize.hpp"

using namespace subcoda;

namespace {

CodaRecord record_with(std::vector<double> icis) {
  CodaRecord r;
  r.coda_id = "c";
  r.sample_id = "s";
  r.icis = std::move(icis);
  return r;
}

}  // namespace

TEST_CASE("alphabet size and end symbol from the discretization") {
  const Alphabet a(DiscretizationConfig{});
  CHECK(a.size() == 21);
  CHECK(a.end_symbol() == 20);

  const Alphabet tiny(DiscretizationConfig{0.5, 1.0});
  CHECK(tiny.size() == 3);
  CHECK(tiny.end_symbol() == 2);

  CHECK_THROWS_AS(Alphabet(DiscretizationConfig{0.0, 1.0}), Error);
  CHECK_THROWS_AS(Alphabet(DiscretizationConfig{0.5, 0.1}), Error);
}

TEST_CASE("discretize_ici maps by floored quotient with truncation") {
  const DiscretizationConfig cfg{};
  CHECK(discretize_ici(0.12, cfg) == 2);
  CHECK(discretize_ici(1.5, cfg) == 20);  // truncates onto the end symbol
  CHECK(discretize_ici(0.049999, cfg) == 0);

  CHECK_THROWS_AS(discretize_ici(0.0, cfg), Error);
  CHECK_THROWS_AS(discretize_ici(-0.1, cfg), Error);
  CHECK_THROWS_AS(discretize_ici(std::numeric_limits<double>::infinity(), cfg), Error);
  CHECK_THROWS_AS(discretize_ici(std::numeric_limits<double>::quiet_NaN(), cfg), Error);
}

TEST_CASE("bin edges are inclusive below and exclusive above") {
  // delta_t = 0.25 is exact in binary, so the real-number bin semantics
  // hold without rounding caveats
  const DiscretizationConfig cfg{0.25, 1.0};
  CHECK(discretize_ici(0.25, cfg) == 1);
  CHECK(discretize_ici(0.4999999, cfg) == 1);
  CHECK(discretize_ici(0.5, cfg) == 2);
  CHECK(discretize_ici(0.75, cfg) == 3);
  CHECK(discretize_ici(1.0, cfg) == 4);
}

TEST_CASE("discretize_ici is monotone") {
  const DiscretizationConfig cfg{};
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double a = rng.next_double() * 2.0 + 1e-9;
    const double b = rng.next_double() * 2.0 + 1e-9;
    const double lo = std::min(a, b), hi = std::max(a, b);
    CHECK(discretize_ici(lo, cfg) <= discretize_ici(hi, cfg));
  }
}

TEST_CASE("encode_coda appends one end symbol") {
  const DiscretizationConfig cfg{};
  CHECK(encode_coda(record_with({0.20, 0.21, 0.19}), cfg) ==
        std::vector<Symbol>{4, 4, 3, 20});
  CHECK(encode_coda(record_with({0.07}), cfg) == std::vector<Symbol>{1, 20});
  // a mid-coda ICI above t_max also lands on the end symbol; 0.3 sits on a
  // bin edge and its double quotient 0.3/0.05 = 5.999... floors to 5
  CHECK(encode_coda(record_with({1.2, 0.3}), cfg) == std::vector<Symbol>{20, 5, 20});
  CHECK_THROWS_AS(encode_coda(record_with({}), cfg), Error);
}

TEST_CASE("encode_sample concatenates coda encodings in order") {
  const DiscretizationConfig cfg{};
  CodaSample sample{"s", std::nullopt,
                    {record_with({0.20, 0.21}), record_with({0.07})}};
  const SymbolStream stream = encode_sample(sample, cfg);
  CHECK(stream.symbols == std::vector<Symbol>{4, 4, 20, 1, 20});
  CHECK(stream.coda_ends == std::vector<std::size_t>{2, 4});
  CHECK(stream.alphabet_size == 21);

  CodaSample single{"s", std::nullopt, {record_with({0.20, 0.21})}};
  CHECK(encode_sample(single, cfg).symbols == encode_coda(single.records[0], cfg));

  CHECK_THROWS_AS(encode_sample(CodaSample{"e", std::nullopt, {}}, cfg), Error);
}

TEST_CASE("stream length and boundary count on a planted sample") {
  const DiscretizationConfig cfg{};
  Rng rng(11);
  CodaSample sample{"s", std::nullopt, {}};
  std::size_t expected_length = 0;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> icis;
    const std::size_t len = 1 + rng.next_below(8);
    for (std::size_t j = 0; j < len; ++j) {
      icis.push_back(0.05 + rng.next_double());
    }
    expected_length += len + 1;
    auto r = record_with(std::move(icis));
    r.coda_id = "c" + std::to_string(i);
    sample.records.push_back(std::move(r));
  }
  const SymbolStream stream = encode_sample(sample, cfg);
  CHECK(stream.symbols.size() == expected_length);
  CHECK(stream.coda_ends.size() == 200);

  // end symbols >= codas, equal only when no raw ICI reaches t_max
  std::size_t end_count = 0;
  for (const Symbol s : stream.symbols) end_count += (s == 20);
  CHECK(end_count >= 200);
}

TEST_CASE("bin_center round-trips through discretize") {
  const DiscretizationConfig cfg{};
  for (Symbol s = 0; s < 20; ++s) {
    CHECK(discretize_ici(bin_center(s, cfg), cfg) == s);
  }
  CHECK(bin_center(20, cfg) == cfg.t_max);
  CHECK_THROWS_AS(bin_center(21, cfg), Error);
}
