#include "subcoda/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace subcoda {

double FixedOrderModel::probability(std::span<const Symbol> history,
                                    Symbol next) const {
  if (history.size() != static_cast<std::size_t>(order_)) {
    throw Error(fmt::format("history length {} does not match model order {}",
                            history.size(), order_));
  }
  const std::vector<Symbol> key(history.begin(), history.end());
  const auto it = table_.find(key);
  if (it == table_.end()) return 0.0;
  const auto& next_counts = it->second.next;
  const auto pos = std::lower_bound(
      next_counts.begin(), next_counts.end(), next,
      [](const auto& entry, Symbol k) { return entry.first < k; });
  if (pos == next_counts.end() || pos->first != next) return 0.0;
  return static_cast<double>(pos->second) / static_cast<double>(it->second.total);
}

double FixedOrderModel::log_likelihood(std::span<const Symbol> symbols) const {
  const std::size_t h = static_cast<std::size_t>(order_);
  if (symbols.size() <= h) throw Error("stream too short for model order");
  double total = 0.0;
  for (std::size_t t = h; t < symbols.size(); ++t) {
    const double p = probability(symbols.subspan(t - h, h), symbols[t]);
    if (p == 0.0) {
      throw Error(fmt::format("transition at position {} never observed by the model", t));
    }
    total += std::log(p);
  }
  return total;
}

double FixedOrderModel::aic(std::span<const Symbol> symbols) const {
  const double k = static_cast<double>(alphabet_size_ - 1) *
                   static_cast<double>(table_.size());
  return 2.0 * k - 2.0 * log_likelihood(symbols);
}

FixedOrderModel fit_fixed(const SymbolStream& stream, int order) {
  if (order < 0) throw Error("order must be >= 0");
  const std::size_t h = static_cast<std::size_t>(order);
  if (stream.symbols.size() <= h) {
    throw Error(fmt::format("stream of length {} too short for order {}",
                            stream.symbols.size(), order));
  }
  FixedOrderModel model;
  model.order_ = order;
  model.alphabet_size_ = stream.alphabet_size;

  const auto& s = stream.symbols;
  std::vector<Symbol> key(h);
  for (std::size_t t = h; t < s.size(); ++t) {
    std::copy(s.begin() + (t - h), s.begin() + t, key.begin());
    auto& entry = model.table_[key];
    ++entry.total;
    auto it = std::lower_bound(entry.next.begin(), entry.next.end(), s[t],
                               [](const auto& e, Symbol k) { return e.first < k; });
    if (it != entry.next.end() && it->first == s[t]) {
      ++it->second;
    } else {
      entry.next.insert(it, {s[t], 1u});
    }
  }
  return model;
}

std::vector<OrderScanRow> scan_orders(const SymbolStream& stream, int h_min,
                                      int h_max) {
  if (h_min < 0 || h_max < h_min) throw Error("invalid order range");
  std::vector<OrderScanRow> rows;
  for (int h = h_min; h <= h_max; ++h) {
    const FixedOrderModel model = fit_fixed(stream, h);
    OrderScanRow row;
    row.order = h;
    row.histories = model.history_count();

    double sum = 0.0, sum_sq = 0.0, ll = 0.0;
    std::size_t entries = 0;
    for (const auto& [hist, entry] : model.table()) {
      const double total = static_cast<double>(entry.total);
      for (const auto& [sym, count] : entry.next) {
        const double p = static_cast<double>(count) / total;
        sum += p;
        sum_sq += p * p;
        ll += static_cast<double>(count) * std::log(p);
        ++entries;
      }
    }
    row.mean_probability = sum / static_cast<double>(entries);
    row.var_probability =
        sum_sq / static_cast<double>(entries) - row.mean_probability * row.mean_probability;
    row.var_probability = std::max(row.var_probability, 0.0);
    row.nonzero_per_history =
        static_cast<double>(entries) / static_cast<double>(model.history_count());
    row.aic = 2.0 * static_cast<double>(stream.alphabet_size - 1) *
                  static_cast<double>(model.history_count()) -
              2.0 * ll;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ResolutionScanRow> resolution_scan(const CodaSample& sample,
                                               const std::vector<double>& delta_ts,
                                               double t_max, const FitConfig& config) {
  if (delta_ts.empty()) throw Error("no delta_t values supplied");
  std::vector<ResolutionScanRow> rows;
  for (const double delta_t : delta_ts) {
    const DiscretizationConfig cfg{delta_t, t_max};
    cfg.validate();
    const SymbolStream stream = encode_sample(sample, cfg);
    // an unset threshold resolves per delta_t, since the alphabet changes
    const ContextTree tree = ContextTree::fit(stream, config);
    const ContextTree memoryless =
        tree.pruned(std::numeric_limits<double>::infinity());
    ResolutionScanRow row;
    row.delta_t = delta_t;
    row.aic_vlmc = tree.aic(stream.symbols);
    row.aic_order0 = memoryless.aic(stream.symbols);
    row.difference = row.aic_vlmc - row.aic_order0;
    rows.push_back(row);
  }
  return rows;
}

double best_resolution(const std::vector<ResolutionScanRow>& rows) {
  if (rows.empty()) throw Error("empty resolution scan");
  const auto it = std::min_element(rows.begin(), rows.end(),
                                   [](const auto& a, const auto& b) {
                                     return a.difference < b.difference;
                                   });
  return it->delta_t;
}

}  // namespace subcoda
