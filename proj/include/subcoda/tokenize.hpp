#pragma once

#include <span>
#include <vector>

#include "subcoda/ingest.hpp"
#include "subcoda/types.hpp"

namespace subcoda {

/// Binning of continuous ICIs: bins of width delta_t, truncated at t_max.
struct DiscretizationConfig {
  double delta_t = 0.05;
  double t_max = 1.0;

  void validate() const;
};

/// The finite symbol set induced by a discretization. Symbols are
/// 0 .. floor(t_max/delta_t); the last one doubles as the coda-end marker
/// since every ICI >= t_max truncates onto it.
class Alphabet {
 public:
  explicit Alphabet(const DiscretizationConfig& config);

  std::size_t size() const { return size_; }
  Symbol end_symbol() const { return static_cast<Symbol>(size_ - 1); }
  const DiscretizationConfig& config() const { return config_; }

 private:
  DiscretizationConfig config_;
  std::size_t size_;
};

/// A tokenized coda sample: concatenated coda encodings, each terminated by
/// the end symbol. coda_ends holds the index of each coda's terminal symbol.
struct SymbolStream {
  std::vector<Symbol> symbols;
  std::vector<std::size_t> coda_ends;
  std::size_t alphabet_size = 0;
  DiscretizationConfig config;

  /// Stream over a synthetic alphabet of n symbols (delta_t chosen so the
  /// induced alphabet size matches). For hand-built test data.
  static SymbolStream over_alphabet(std::vector<Symbol> symbols, std::size_t n);
};

/// Bin map: floor(min(ici, t_max) / delta_t). The floor is taken
/// on the raw double quotient with no epsilon adjustment, so results are
/// bit-reproducible.
Symbol discretize_ici(double ici, const DiscretizationConfig& config);

/// Representative ICI for a symbol (bin midpoint); end symbol maps to t_max.
double bin_center(Symbol symbol, const DiscretizationConfig& config);

/// One symbol per ICI, in order, plus a terminal end symbol.
std::vector<Symbol> encode_coda(const CodaRecord& record,
                                const DiscretizationConfig& config);

SymbolStream encode_sample(const CodaSample& sample,
                           const DiscretizationConfig& config);

/// Concatenated encoding of an arbitrary group of codas (record order kept).
SymbolStream encode_records(std::span<const CodaRecord> records,
                            const DiscretizationConfig& config);

}  // namespace subcoda
