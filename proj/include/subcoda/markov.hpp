#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "subcoda/tokenize.hpp"
#include "subcoda/types.hpp"
#include "subcoda/vlmc.hpp"

namespace subcoda {

/// Fixed-memory Markov baseline: MLE transition table over the length-h
/// histories actually observed in the training stream.
class FixedOrderModel {
 public:
  struct HistoryEntry {
    std::uint64_t total = 0;
    std::vector<std::pair<Symbol, std::uint32_t>> next;  // sorted by symbol
  };

  int order() const { return order_; }
  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t history_count() const { return table_.size(); }

  /// MLE transition probability; 0 for transitions never observed.
  double probability(std::span<const Symbol> history, Symbol next) const;

  /// Raw MLE log likelihood over positions [order, length). Throws on a
  /// transition the model never observed.
  double log_likelihood(std::span<const Symbol> symbols) const;
  /// 2k - 2 log L with k = (alphabet_size - 1) * observed history count.
  double aic(std::span<const Symbol> symbols) const;

  const auto& table() const { return table_; }

 private:
  friend FixedOrderModel fit_fixed(const SymbolStream&, int);

  struct VecHash {
    std::size_t operator()(const std::vector<Symbol>& v) const {
      std::size_t h = 1469598103934665603ull;
      for (const Symbol s : v) {
        h ^= static_cast<std::size_t>(s) + 1;
        h *= 1099511628211ull;
      }
      return h;
    }
  };

  int order_ = 0;
  std::size_t alphabet_size_ = 0;
  std::unordered_map<std::vector<Symbol>, HistoryEntry, VecHash> table_;
};

FixedOrderModel fit_fixed(const SymbolStream& stream, int order);

struct OrderScanRow {
  int order = 0;
  double mean_probability = 0.0;      // over nonzero transition probabilities
  double var_probability = 0.0;       // population variance of the same
  double nonzero_per_history = 0.0;
  double aic = 0.0;
  std::size_t histories = 0;
};

/// Memory-bifurcation scan: fits fixed-order models for h in
/// [h_min, h_max] and reports transition-probability statistics plus AIC,
/// each model scored on the stream it was fitted on.
std::vector<OrderScanRow> scan_orders(const SymbolStream& stream, int h_min, int h_max);

struct ResolutionScanRow {
  double delta_t = 0.0;
  double aic_vlmc = 0.0;
  double aic_order0 = 0.0;
  double difference = 0.0;  // aic_vlmc - aic_order0; more negative is better
};

/// Temporal-resolution selection: per delta_t, tokenizes the sample, fits a
/// context tree and a memoryless (root-only) baseline, and reports the AIC
/// difference. Both AICs use the same smoothed-likelihood convention so a
/// one-symbol stream yields a difference of exactly zero.
std::vector<ResolutionScanRow> resolution_scan(const CodaSample& sample,
                                               const std::vector<double>& delta_ts,
                                               double t_max,
                                               const FitConfig& config = {});

/// delta_t of the most negative difference (first one on ties).
double best_resolution(const std::vector<ResolutionScanRow>& rows);

}  // namespace subcoda
