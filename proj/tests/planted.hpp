// Synthetic data with known structure, shared by the unit and acceptance
// suites. Two "clans" of context trees over the default 21-symbol alphabet,
// differing in four context distributions, plus stream generators for the
// fixed-order scans.
#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "subcoda/ingest.hpp"
#include "subcoda/rng.hpp"
#include "subcoda/tokenize.hpp"
#include "subcoda/vlmc.hpp"

namespace planted {

using subcoda::CodaRecord;
using subcoda::CodaSample;
using subcoda::ContextTree;
using subcoda::Dataset;
using subcoda::Rng;
using subcoda::Symbol;

using ContextSpec =
    std::vector<std::pair<std::vector<Symbol>, std::map<Symbol, std::uint64_t>>>;

inline ContextTree make_tree(std::size_t alphabet_size, const ContextSpec& contexts,
                             double delta_t = 0.05, double t_max = 1.0,
                             int max_depth = 10) {
  nlohmann::json j;
  j["alphabet_size"] = alphabet_size;
  j["delta_t"] = delta_t;
  j["t_max"] = t_max;
  j["D"] = max_depth;
  j["K"] = subcoda::default_threshold(alphabet_size);
  auto arr = nlohmann::json::array();
  for (const auto& [context, counts] : contexts) {
    nlohmann::json entry;
    entry["context"] = context;
    std::uint64_t total = 0;
    nlohmann::json cc = nlohmann::json::object();
    for (const auto& [sym, c] : counts) {
      cc[std::to_string(sym)] = c;
      total += c;
    }
    entry["count"] = total;
    entry["child_counts"] = std::move(cc);
    arr.push_back(std::move(entry));
  }
  j["contexts"] = std::move(arr);
  return ContextTree::from_json(j);
}

// Clan generators over the default alphabet (n=21, end=20). The first
// symbol of a coda is never the end symbol, so every generated coda holds
// at least one ICI. The clans differ on all four contexts with total
// variation 0.35-0.40.
inline ContextTree clan_a_tree() {
  return make_tree(21, {
      {{}, {{4, 700}, {6, 300}}},
      {{4}, {{4, 200}, {6, 500}, {20, 300}}},
      {{6}, {{4, 650}, {6, 100}, {20, 250}}},
      {{20}, {{4, 700}, {6, 300}}},
  });
}

inline ContextTree clan_b_tree() {
  return make_tree(21, {
      {{}, {{4, 300}, {6, 700}}},
      {{4}, {{4, 550}, {6, 150}, {20, 300}}},
      {{6}, {{4, 250}, {6, 500}, {20, 250}}},
      {{20}, {{4, 300}, {6, 700}}},
  });
}

/// Total variation distance between the raw next-symbol distributions of
/// two trees at the same context.
inline double context_tv(const ContextTree& a, const ContextTree& b,
                         const std::vector<Symbol>& context) {
  const auto& na = a.lookup(context);
  const auto& nb = b.lookup(context);
  double tv = 0.0;
  for (Symbol x = 0; x < a.alphabet_size(); ++x) {
    tv += std::abs(na.probability(x) - nb.probability(x));
  }
  return 0.5 * tv;
}

inline CodaRecord symbols_to_record(const std::vector<Symbol>& coda,
                                    const subcoda::DiscretizationConfig& cfg,
                                    std::string coda_id, std::string sample_id,
                                    std::string clan) {
  CodaRecord r;
  r.coda_id = std::move(coda_id);
  r.sample_id = std::move(sample_id);
  r.clan = std::move(clan);
  for (std::size_t i = 0; i + 1 < coda.size(); ++i) {
    r.icis.push_back(subcoda::bin_center(coda[i], cfg));
  }
  return r;
}

/// n_samples per clan, each with codas_per_sample codas generated from the
/// clan's tree. Sample ids are <clan>_<index>.
inline Dataset two_clan_dataset(std::size_t n_samples, std::size_t codas_per_sample,
                                std::uint64_t seed) {
  const std::map<std::string, ContextTree> trees = [] {
    std::map<std::string, ContextTree> m;
    m.emplace("A", clan_a_tree());
    m.emplace("B", clan_b_tree());
    return m;
  }();
  Dataset dataset;
  dataset.source = "planted";
  std::size_t stream_index = 0;
  std::size_t coda_counter = 0;
  for (const auto& [clan, tree] : trees) {
    for (std::size_t s = 0; s < n_samples; ++s) {
      const std::string sample_id = clan + "_" + std::to_string(s);
      CodaSample sample{sample_id, clan, {}};
      const auto codas =
          tree.generate(codas_per_sample, Rng::derive(seed, stream_index++));
      for (const auto& coda : codas) {
        sample.records.push_back(symbols_to_record(
            coda, tree.discretization(), "c" + std::to_string(coda_counter++),
            sample_id, clan));
      }
      dataset.samples.push_back(std::move(sample));
    }
  }
  return dataset;
}

/// Period-4 stream whose fourth symbol is pinned by the symbol three steps
/// back: blocks (a, u1, u2, 12+a) with a in {0,1}, u1 uniform over 2..6,
/// u2 uniform over 7..11. A hand-built chain of exact order 3 over 14
/// symbols.
inline subcoda::SymbolStream order3_stream(std::size_t n_blocks, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Symbol> s;
  s.reserve(4 * n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const Symbol anchor = static_cast<Symbol>(rng.next_below(2));
    s.push_back(anchor);
    s.push_back(static_cast<Symbol>(2 + rng.next_below(5)));
    s.push_back(static_cast<Symbol>(7 + rng.next_below(5)));
    s.push_back(static_cast<Symbol>(12 + anchor));
  }
  return subcoda::SymbolStream::over_alphabet(std::move(s), 14);
}

/// In-place seeded Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

/// A structured stream from the clan-A generator with its symbols shuffled:
/// same marginal, no temporal structure.
inline subcoda::SymbolStream shuffled_stream(std::size_t min_symbols,
                                             std::uint64_t seed) {
  const ContextTree tree = clan_a_tree();
  std::vector<Symbol> symbols;
  const auto codas = tree.generate(min_symbols / 4 + 64, seed);
  for (const auto& coda : codas) {
    symbols.insert(symbols.end(), coda.begin(), coda.end());
    if (symbols.size() >= min_symbols) break;
  }
  symbols.resize(min_symbols);
  shuffle(symbols, seed ^ 0x5b5b5b5bULL);
  return subcoda::SymbolStream::over_alphabet(std::move(symbols), 21);
}

}  // namespace planted
