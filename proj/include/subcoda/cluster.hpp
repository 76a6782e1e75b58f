#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "subcoda/metric.hpp"
#include "subcoda/types.hpp"

namespace subcoda {

/// One agglomeration step. Cluster ids follow the usual convention:
/// leaves are 0..n-1 and merge m creates cluster n+m.
struct Merge {
  int left = 0;
  int right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::vector<std::string> labels;
  std::vector<Merge> merges;  // n-1 merges, heights non-decreasing

  nlohmann::ordered_json to_json() const;
  static Dendrogram from_json(const nlohmann::json& j);
  std::string to_newick() const;
  void save(const std::filesystem::path& json_path) const;
};

/// Agglomerative clustering with unweighted average linkage. Ties between
/// candidate pairs break toward the pair with the smallest leaf indices, so
/// the result is deterministic.
Dendrogram average_linkage(const DistanceMatrix& matrix);

/// Partition into k clusters by undoing the k-1 last merges. Labels are
/// 0-based cluster ids numbered by each cluster's first leaf.
std::vector<int> cut(const Dendrogram& dendrogram, std::size_t k);

/// Pair-counting adjusted Rand index; 1 for identical partitions, about 0
/// for independent ones, bounded below by -0.5.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct AriSweepRow {
  std::size_t k = 0;
  double ari = 0.0;
};

struct AriSweepResult {
  std::vector<AriSweepRow> rows;  // k = 2..n
  std::size_t best_k = 0;
  double best_ari = 0.0;
};

/// ARI of every dendrogram cut k=2..n against a reference labeling.
AriSweepResult ari_sweep(const Dendrogram& dendrogram,
                         std::span<const int> reference);

/// Maps string labels to dense integer ids (first occurrence order).
std::vector<int> dense_labels(const std::vector<std::string>& labels);

}  // namespace subcoda
