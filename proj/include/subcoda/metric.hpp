#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "subcoda/types.hpp"
#include "subcoda/vlmc.hpp"

namespace subcoda {

struct DistanceMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;
  bool symmetric = false;

  double at(std::size_t i, std::size_t j) const { return values[i][j]; }
  std::size_t size() const { return labels.size(); }

  void save_csv(const std::filesystem::path& path) const;
  static DistanceMatrix load_csv(const std::filesystem::path& path);
};

/// Directed tree dissimilarity: the mean, over the contexts of the first
/// tree (root included), of KL(q_w || p_phi(w)) where phi(w) is the longest
/// suffix of w kept by the second tree. The first argument's distributions
/// are raw MLE; the second's are smoothed, which keeps every term finite.
double divergence(const ContextTree& from, const ContextTree& to);

/// max(divergence(a,b), divergence(b,a)); symmetric by construction.
double symmetric_distance(const ContextTree& a, const ContextTree& b);

enum class DistanceMode { symmetric, asymmetric };

DistanceMatrix distance_matrix(
    const std::vector<std::pair<std::string, const ContextTree*>>& trees,
    DistanceMode mode, int threads = 1);

}  // namespace subcoda
