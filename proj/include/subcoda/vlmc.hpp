#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "subcoda/tokenize.hpp"
#include "subcoda/types.hpp"

namespace subcoda {

/// Additive smoothing constant used whenever a distribution is evaluated
/// across data it was not fitted on (likelihood scoring, classification,
/// cross-tree divergence). Fitting and pruning always use the raw MLE.
inline constexpr double kSmoothingAlpha = 0.5;

struct FitConfig {
  int max_depth = 10;
  /// Information-gain threshold; defaults to half the 0.95 chi-square
  /// quantile with (alphabet_size - 1) degrees of freedom.
  std::optional<double> threshold;
};

double default_threshold(std::size_t alphabet_size);

/// One context w: its occurrence count N(w) (positions where w occurs and
/// is followed by at least one symbol) and the observed next-symbol counts,
/// which satisfy N(w) = sum_x N(wx).
class ContextNode {
 public:
  const std::vector<Symbol>& context() const { return context_; }
  std::uint64_t count() const { return count_; }
  const std::vector<std::pair<Symbol, std::uint32_t>>& next_counts() const {
    return next_counts_;
  }
  /// Weighted KL divergence against the parent context (NaN for the root).
  double gain() const { return gain_; }
  std::size_t depth() const { return context_.size(); }

  std::uint32_t next_count(Symbol x) const;
  /// Raw MLE transition probability.
  double probability(Symbol x) const;
  /// Add-alpha smoothed transition probability over the full alphabet.
  double smoothed_probability(Symbol x, std::size_t alphabet_size) const;

  const ContextNode* child(Symbol oldest) const;
  const std::vector<std::pair<Symbol, std::unique_ptr<ContextNode>>>& children() const {
    return children_;
  }

 private:
  friend class ContextTree;
  std::vector<Symbol> context_;  // oldest symbol first
  std::uint64_t count_ = 0;
  std::vector<std::pair<Symbol, std::uint32_t>> next_counts_;  // sorted by symbol
  std::vector<std::pair<Symbol, std::unique_ptr<ContextNode>>> children_;  // sorted
  double gain_ = std::numeric_limits<double>::quiet_NaN();

  ContextNode* ensure_child(Symbol oldest);
  void add_transition(Symbol next);
};

/// N(w) * D_KL(q_w || q_u) where u is the parent (longest proper suffix) of w.
double information_gain(const ContextNode& w, const ContextNode& parent);

/// A variable-length Markov chain over discretized ICIs: the suffix-closed
/// set of contexts kept by information-gain pruning, each with its
/// next-symbol distribution. Immutable once built; safe to share across
/// threads.
class ContextTree {
 public:
  /// Saturated suffix counts up to max_depth: every sequence occurring in
  /// the stream followed by at least one symbol, with its transition counts
  /// and information gain. Nothing is pruned yet.
  static ContextTree count_subsequences(const SymbolStream& stream,
                                        const FitConfig& config = {});

  /// count_subsequences followed by pruning at the configured threshold.
  static ContextTree fit(const SymbolStream& stream, const FitConfig& config = {});

  /// Copy of this tree keeping exactly the contexts whose gain exceeds the
  /// threshold, closed under suffixes (a context needed by a kept deeper
  /// context is kept too). The root is always kept.
  ContextTree pruned(double threshold) const;

  const ContextNode& root() const { return *root_; }
  /// phi: the node of the longest context that is a suffix of the history.
  const ContextNode& lookup(std::span<const Symbol> history) const;

  std::size_t context_count() const { return context_count_; }  // incl. root
  std::size_t max_context_depth() const;
  std::size_t alphabet_size() const { return alphabet_size_; }
  Symbol end_symbol() const { return static_cast<Symbol>(alphabet_size_ - 1); }
  double threshold() const { return threshold_; }
  int max_depth() const { return max_depth_; }
  std::uint64_t stream_length() const { return stream_length_; }
  const DiscretizationConfig& discretization() const { return config_; }

  /// Pre-order walk over all contexts (root first, children by symbol).
  void for_each_context(const std::function<void(const ContextNode&)>& fn) const;

  /// Smoothed log likelihood of a symbol sequence under this tree.
  double log_likelihood(std::span<const Symbol> symbols) const;
  /// 2k - 2 log L with k = context_count * (alphabet_size - 1).
  double aic(std::span<const Symbol> symbols) const;

  /// Samples codas from the raw MLE distributions. Generation is one
  /// continuous walk: each coda ends when the end symbol is emitted and the
  /// end symbol stays in the rolling history, so cross-coda transitions
  /// follow the model. A coda exceeding 200 symbols aborts with an error.
  std::vector<std::vector<Symbol>> generate(std::size_t n_codas,
                                            std::uint64_t seed) const;

  nlohmann::ordered_json to_json() const;
  static ContextTree from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ContextTree load(const std::filesystem::path& path);

  ContextTree(ContextTree&&) = default;
  ContextTree& operator=(ContextTree&&) = default;

 private:
  ContextTree() = default;

  std::unique_ptr<ContextNode> root_;
  std::size_t alphabet_size_ = 0;
  std::size_t context_count_ = 0;
  int max_depth_ = 0;
  double threshold_ = 0.0;
  std::uint64_t stream_length_ = 0;
  DiscretizationConfig config_;

  void recount();
  void compute_gains();
};

/// Highest-likelihood clan for one coda; ties resolve to the
/// lexicographically smallest label.
std::string classify(std::span<const Symbol> coda,
                     const std::map<std::string, ContextTree>& models);

}  // namespace subcoda
