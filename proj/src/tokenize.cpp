#include "subcoda/tokenize.hpp"

#include <cmath>

#include <fmt/format.h>

namespace subcoda {

void DiscretizationConfig::validate() const {
  if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
    throw Error(fmt::format("delta_t must be positive and finite, got {}", delta_t));
  }
  if (!(t_max >= delta_t) || !std::isfinite(t_max)) {
    throw Error(fmt::format("t_max must be finite and >= delta_t, got {}", t_max));
  }
}

Alphabet::Alphabet(const DiscretizationConfig& config) : config_(config) {
  config.validate();
  size_ = static_cast<std::size_t>(std::floor(config.t_max / config.delta_t)) + 1;
}

SymbolStream SymbolStream::over_alphabet(std::vector<Symbol> symbols, std::size_t n) {
  if (n < 2) throw Error("alphabet size must be >= 2");
  SymbolStream s;
  s.symbols = std::move(symbols);
  s.alphabet_size = n;
  s.config = DiscretizationConfig{1.0, static_cast<double>(n - 1)};
  return s;
}

Symbol discretize_ici(double ici, const DiscretizationConfig& config) {
  if (!std::isfinite(ici) || ici <= 0.0) {
    throw Error(fmt::format("ICI must be positive and finite, got {}", ici));
  }
  const double clipped = std::min(ici, config.t_max);
  return static_cast<Symbol>(std::floor(clipped / config.delta_t));
}

double bin_center(Symbol symbol, const DiscretizationConfig& config) {
  const Alphabet alphabet(config);
  if (symbol >= alphabet.size()) {
    throw Error(fmt::format("symbol {} outside alphabet of size {}", symbol, alphabet.size()));
  }
  if (symbol == alphabet.end_symbol()) return config.t_max;
  return (static_cast<double>(symbol) + 0.5) * config.delta_t;
}

std::vector<Symbol> encode_coda(const CodaRecord& record,
                                const DiscretizationConfig& config) {
  const Alphabet alphabet(config);
  if (record.icis.empty()) {
    throw Error(fmt::format("coda '{}' has no ICIs", record.coda_id));
  }
  std::vector<Symbol> out;
  out.reserve(record.icis.size() + 1);
  for (const double ici : record.icis) out.push_back(discretize_ici(ici, config));
  out.push_back(alphabet.end_symbol());
  return out;
}

SymbolStream encode_records(std::span<const CodaRecord> records,
                            const DiscretizationConfig& config) {
  const Alphabet alphabet(config);
  SymbolStream stream;
  stream.alphabet_size = alphabet.size();
  stream.config = config;
  for (const auto& record : records) {
    const auto coda = encode_coda(record, config);
    stream.symbols.insert(stream.symbols.end(), coda.begin(), coda.end());
    stream.coda_ends.push_back(stream.symbols.size() - 1);
  }
  return stream;
}

SymbolStream encode_sample(const CodaSample& sample,
                           const DiscretizationConfig& config) {
  if (sample.records.empty()) {
    throw Error(fmt::format("sample '{}' is empty", sample.sample_id));
  }
  return encode_records(sample.records, config);
}

}  // namespace subcoda
