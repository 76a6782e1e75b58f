#include "subcoda/vlmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "subcoda/distributions.hpp"
#include "subcoda/rng.hpp"

namespace subcoda {

namespace {

constexpr std::size_t kGenerationCap = 200;

template <typename Vec, typename Key>
auto find_sorted(Vec& vec, Key key) {
  auto it = std::lower_bound(vec.begin(), vec.end(), key,
                             [](const auto& entry, Key k) { return entry.first < k; });
  return (it != vec.end() && it->first == key) ? it : vec.end();
}

}  // namespace

double default_threshold(std::size_t alphabet_size) {
  if (alphabet_size < 2) throw Error("alphabet size must be >= 2");
  return 0.5 * chi_square_quantile(0.95, static_cast<double>(alphabet_size - 1));
}

std::uint32_t ContextNode::next_count(Symbol x) const {
  const auto it = find_sorted(next_counts_, x);
  return it == next_counts_.end() ? 0u : it->second;
}

double ContextNode::probability(Symbol x) const {
  return count_ == 0 ? 0.0
                     : static_cast<double>(next_count(x)) / static_cast<double>(count_);
}

double ContextNode::smoothed_probability(Symbol x, std::size_t alphabet_size) const {
  return (static_cast<double>(next_count(x)) + kSmoothingAlpha) /
         (static_cast<double>(count_) + kSmoothingAlpha * static_cast<double>(alphabet_size));
}

const ContextNode* ContextNode::child(Symbol oldest) const {
  const auto it = find_sorted(children_, oldest);
  return it == children_.end() ? nullptr : it->second.get();
}

ContextNode* ContextNode::ensure_child(Symbol oldest) {
  auto it = std::lower_bound(children_.begin(), children_.end(), oldest,
                             [](const auto& entry, Symbol k) { return entry.first < k; });
  if (it != children_.end() && it->first == oldest) return it->second.get();
  auto node = std::make_unique<ContextNode>();
  node->context_.reserve(context_.size() + 1);
  node->context_.push_back(oldest);
  node->context_.insert(node->context_.end(), context_.begin(), context_.end());
  return children_.insert(it, {oldest, std::move(node)})->second.get();
}

void ContextNode::add_transition(Symbol next) {
  ++count_;
  auto it = std::lower_bound(next_counts_.begin(), next_counts_.end(), next,
                             [](const auto& entry, Symbol k) { return entry.first < k; });
  if (it != next_counts_.end() && it->first == next) {
    ++it->second;
  } else {
    next_counts_.insert(it, {next, 1u});
  }
}

double information_gain(const ContextNode& w, const ContextNode& parent) {
  if (w.depth() != parent.depth() + 1 ||
      !std::equal(w.context().begin() + 1, w.context().end(),
                  parent.context().begin(), parent.context().end())) {
    throw Error("information_gain: second argument is not the parent context");
  }
  double kl = 0.0;
  const double n_w = static_cast<double>(w.count());
  const double n_u = static_cast<double>(parent.count());
  for (const auto& [x, c] : w.next_counts()) {
    const std::uint32_t cu = parent.next_count(x);
    if (cu == 0) {
      throw Error("information_gain: child transition unseen in parent counts");
    }
    const double qw = static_cast<double>(c) / n_w;
    const double qu = static_cast<double>(cu) / n_u;
    kl += qw * std::log(qw / qu);
  }
  return n_w * std::max(kl, 0.0);
}

ContextTree ContextTree::count_subsequences(const SymbolStream& stream,
                                            const FitConfig& config) {
  if (stream.symbols.size() < 2) throw Error("stream must hold at least 2 symbols");
  if (config.max_depth < 1) throw Error("max_depth must be >= 1");
  if (stream.alphabet_size < 2) throw Error("alphabet size must be >= 2");
  for (const Symbol s : stream.symbols) {
    if (s >= stream.alphabet_size) {
      throw Error(fmt::format("symbol {} outside alphabet of size {}", s,
                              stream.alphabet_size));
    }
  }

  ContextTree tree;
  tree.root_ = std::make_unique<ContextNode>();
  tree.alphabet_size_ = stream.alphabet_size;
  tree.max_depth_ = config.max_depth;
  tree.threshold_ = config.threshold ? *config.threshold
                                     : default_threshold(stream.alphabet_size);
  tree.stream_length_ = stream.symbols.size();
  tree.config_ = stream.config;

  const auto& s = stream.symbols;
  const std::size_t depth_limit = static_cast<std::size_t>(config.max_depth);
  for (std::size_t t = 0; t < s.size(); ++t) {
    ContextNode* node = tree.root_.get();
    node->add_transition(s[t]);
    const std::size_t max_d = std::min(depth_limit, t);
    for (std::size_t d = 1; d <= max_d; ++d) {
      node = node->ensure_child(s[t - d]);
      node->add_transition(s[t]);
    }
  }
  tree.recount();
  tree.compute_gains();
  return tree;
}

void ContextTree::recount() {
  context_count_ = 0;
  for_each_context([&](const ContextNode&) { ++context_count_; });
}

void ContextTree::compute_gains() {
  const std::function<void(ContextNode&)> walk = [&](ContextNode& node) {
    for (auto& [sym, child] : node.children_) {
      child->gain_ = information_gain(*child, node);
      walk(*child);
    }
  };
  walk(*root_);
}

ContextTree ContextTree::pruned(double threshold) const {
  // keep(w) = gain(w) > K or any descendant kept; the kept set is then
  // automatically suffix-closed because trie ancestors are exactly suffixes.
  const std::function<std::unique_ptr<ContextNode>(const ContextNode&)> copy_kept =
      [&](const ContextNode& node) -> std::unique_ptr<ContextNode> {
    std::vector<std::pair<Symbol, std::unique_ptr<ContextNode>>> kept_children;
    for (const auto& [sym, child] : node.children_) {
      if (auto kept = copy_kept(*child)) {
        kept_children.emplace_back(sym, std::move(kept));
      }
    }
    const bool self_kept = !std::isnan(node.gain_) && node.gain_ > threshold;
    if (kept_children.empty() && !self_kept) return nullptr;
    auto out = std::make_unique<ContextNode>();
    out->context_ = node.context_;
    out->count_ = node.count_;
    out->next_counts_ = node.next_counts_;
    out->gain_ = node.gain_;
    out->children_ = std::move(kept_children);
    return out;
  };

  ContextTree tree;
  tree.alphabet_size_ = alphabet_size_;
  tree.max_depth_ = max_depth_;
  tree.threshold_ = threshold;
  tree.stream_length_ = stream_length_;
  tree.config_ = config_;
  auto kept_root = copy_kept(*root_);
  if (!kept_root) {
    kept_root = std::make_unique<ContextNode>();
    kept_root->context_ = root_->context_;
    kept_root->count_ = root_->count_;
    kept_root->next_counts_ = root_->next_counts_;
    kept_root->children_.clear();
  }
  tree.root_ = std::move(kept_root);
  tree.recount();
  return tree;
}

ContextTree ContextTree::fit(const SymbolStream& stream, const FitConfig& config) {
  const ContextTree saturated = count_subsequences(stream, config);
  return saturated.pruned(saturated.threshold_);
}

const ContextNode& ContextTree::lookup(std::span<const Symbol> history) const {
  const ContextNode* node = root_.get();
  for (std::size_t d = 1; d <= history.size(); ++d) {
    const ContextNode* child = node->child(history[history.size() - d]);
    if (!child) break;
    node = child;
  }
  return *node;
}

std::size_t ContextTree::max_context_depth() const {
  std::size_t depth = 0;
  for_each_context([&](const ContextNode& n) { depth = std::max(depth, n.depth()); });
  return depth;
}

void ContextTree::for_each_context(
    const std::function<void(const ContextNode&)>& fn) const {
  const std::function<void(const ContextNode&)> walk = [&](const ContextNode& node) {
    fn(node);
    for (const auto& [sym, child] : node.children_) walk(*child);
  };
  walk(*root_);
}

double ContextTree::log_likelihood(std::span<const Symbol> symbols) const {
  double total = 0.0;
  for (std::size_t t = 0; t < symbols.size(); ++t) {
    if (symbols[t] >= alphabet_size_) {
      throw Error(fmt::format("symbol {} outside alphabet of size {}", symbols[t],
                              alphabet_size_));
    }
    const ContextNode& node = lookup(symbols.subspan(0, t));
    total += std::log(node.smoothed_probability(symbols[t], alphabet_size_));
  }
  return total;
}

double ContextTree::aic(std::span<const Symbol> symbols) const {
  const double k = static_cast<double>(context_count_) *
                   static_cast<double>(alphabet_size_ - 1);
  return 2.0 * k - 2.0 * log_likelihood(symbols);
}

std::vector<std::vector<Symbol>> ContextTree::generate(std::size_t n_codas,
                                                       std::uint64_t seed) const {
  if (n_codas < 1) throw Error("n_codas must be >= 1");
  Rng rng(seed);
  std::vector<std::vector<Symbol>> codas;
  codas.reserve(n_codas);
  std::vector<Symbol> history;
  std::vector<Symbol> current;
  const std::size_t history_cap = std::max<std::size_t>(max_context_depth(), 1);

  while (codas.size() < n_codas) {
    const ContextNode& node = lookup(history);
    if (node.count() == 0) throw Error("generate: context with no transitions");
    std::uint64_t r = rng.next_below(node.count());
    Symbol emitted = node.next_counts().back().first;
    for (const auto& [x, c] : node.next_counts()) {
      if (r < c) {
        emitted = x;
        break;
      }
      r -= c;
    }

    current.push_back(emitted);
    if (current.size() > kGenerationCap) {
      throw Error(fmt::format(
          "generate: coda exceeded {} symbols without an end symbol", kGenerationCap));
    }
    history.push_back(emitted);
    if (history.size() > history_cap) history.erase(history.begin());
    if (emitted == end_symbol()) {
      codas.push_back(current);
      current.clear();
    }
  }
  return codas;
}

nlohmann::ordered_json ContextTree::to_json() const {
  nlohmann::ordered_json j;
  j["alphabet_size"] = alphabet_size_;
  j["delta_t"] = config_.delta_t;
  j["t_max"] = config_.t_max;
  j["D"] = max_depth_;
  j["K"] = threshold_;
  auto contexts = nlohmann::ordered_json::array();
  for_each_context([&](const ContextNode& node) {
    nlohmann::ordered_json entry;
    entry["context"] = node.context();
    entry["count"] = node.count();
    auto counts = nlohmann::ordered_json::object();
    for (const auto& [x, c] : node.next_counts()) {
      counts[fmt::format("{}", x)] = c;
    }
    entry["child_counts"] = std::move(counts);
    contexts.push_back(std::move(entry));
  });
  j["contexts"] = std::move(contexts);
  return j;
}

ContextTree ContextTree::from_json(const nlohmann::json& j) {
  ContextTree tree;
  tree.alphabet_size_ = j.at("alphabet_size").get<std::size_t>();
  if (tree.alphabet_size_ < 2) throw Error("alphabet_size must be >= 2");
  tree.config_.delta_t = j.at("delta_t").get<double>();
  tree.config_.t_max = j.at("t_max").get<double>();
  tree.max_depth_ = j.at("D").get<int>();
  tree.threshold_ = j.at("K").get<double>();
  tree.root_ = std::make_unique<ContextNode>();

  // Insert every context; remember which nodes were explicitly provided so
  // suffix-closure violations surface as errors.
  std::vector<const ContextNode*> provided;
  for (const auto& entry : j.at("contexts")) {
    const auto context = entry.at("context").get<std::vector<Symbol>>();
    ContextNode* node = tree.root_.get();
    for (std::size_t d = 1; d <= context.size(); ++d) {
      node = node->ensure_child(context[context.size() - d]);
    }
    if (node->count_ != 0) {
      throw Error(fmt::format("duplicate context in tree document (depth {})",
                              context.size()));
    }
    std::uint64_t total = 0;
    for (const auto& [key, value] : entry.at("child_counts").items()) {
      const unsigned long sym = std::stoul(key);
      const std::uint64_t c = value.get<std::uint64_t>();
      if (sym >= tree.alphabet_size_) {
        throw Error(fmt::format("child symbol {} outside alphabet", sym));
      }
      if (c == 0) throw Error("zero child count in tree document");
      node->next_counts_.emplace_back(static_cast<Symbol>(sym),
                                      static_cast<std::uint32_t>(c));
      total += c;
    }
    std::sort(node->next_counts_.begin(), node->next_counts_.end());
    if (total == 0) throw Error("context with no transitions in tree document");
    if (entry.at("count").get<std::uint64_t>() != total) {
      throw Error("context count does not equal the sum of its child counts");
    }
    node->count_ = total;
    provided.push_back(node);
  }

  tree.for_each_context([&](const ContextNode& node) {
    if (node.count() == 0) {
      throw Error("tree document is not suffix-closed: missing intermediate context");
    }
  });
  tree.recount();
  if (tree.context_count_ != provided.size()) {
    throw Error("tree document contexts do not form a tree");
  }
  return tree;
}

void ContextTree::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write tree file '{}'", path.string()));
  out << to_json().dump(2) << '\n';
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

ContextTree ContextTree::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open tree file '{}'", path.string()));
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

std::string classify(std::span<const Symbol> coda,
                     const std::map<std::string, ContextTree>& models) {
  if (models.size() < 2) throw Error("classify needs at least 2 models");
  const std::size_t alphabet = models.begin()->second.alphabet_size();
  std::string best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (const auto& [label, tree] : models) {
    if (tree.alphabet_size() != alphabet) {
      throw Error("classify: models built over different alphabets");
    }
    const double ll = tree.log_likelihood(coda);
    if (ll > best_ll) {
      best_ll = ll;
      best = label;
    }
  }
  return best;
}

}  // namespace subcoda
