#include "subcoda/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

namespace subcoda {

nlohmann::ordered_json Dendrogram::to_json() const {
  nlohmann::ordered_json j;
  j["labels"] = labels;
  auto merges_json = nlohmann::ordered_json::array();
  for (const auto& m : merges) {
    merges_json.push_back({{"left", m.left},
                           {"right", m.right},
                           {"height", m.height},
                           {"size", m.size}});
  }
  j["merges"] = std::move(merges_json);
  return j;
}

Dendrogram Dendrogram::from_json(const nlohmann::json& j) {
  Dendrogram d;
  d.labels = j.at("labels").get<std::vector<std::string>>();
  for (const auto& m : j.at("merges")) {
    d.merges.push_back(Merge{m.at("left").get<int>(), m.at("right").get<int>(),
                             m.at("height").get<double>(),
                             m.at("size").get<std::size_t>()});
  }
  if (d.merges.size() + 1 != d.labels.size()) {
    throw Error("dendrogram must hold exactly n-1 merges");
  }
  return d;
}

std::string Dendrogram::to_newick() const {
  const int n = static_cast<int>(labels.size());
  const std::function<std::string(int, double)> render = [&](int id,
                                                             double parent_height) {
    if (id < n) {
      std::string name = labels[static_cast<std::size_t>(id)];
      for (char& c : name) {
        if (c == ',' || c == '(' || c == ')' || c == ':' || c == ';' || c == ' ') {
          c = '_';
        }
      }
      return fmt::format("{}:{}", name, parent_height);
    }
    const Merge& m = merges[static_cast<std::size_t>(id - n)];
    return fmt::format("({},{}):{}", render(m.left, m.height),
                       render(m.right, m.height), parent_height - m.height);
  };
  if (merges.empty()) {
    return labels.empty() ? ";" : fmt::format("{};", labels.front());
  }
  const Merge& top = merges.back();
  return fmt::format("({},{});", render(top.left, top.height),
                     render(top.right, top.height));
}

void Dendrogram::save(const std::filesystem::path& json_path) const {
  std::ofstream out(json_path);
  if (!out) throw Error(fmt::format("cannot write '{}'", json_path.string()));
  out << to_json().dump(2) << '\n';
}

Dendrogram average_linkage(const DistanceMatrix& matrix) {
  const std::size_t n = matrix.size();
  if (n < 2) throw Error("clustering needs at least 2 items");
  if (!matrix.symmetric) throw Error("average linkage requires a symmetric matrix");
  for (std::size_t i = 0; i < n; ++i) {
    if (matrix.values[i][i] != 0.0) throw Error("matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (matrix.values[i][j] != matrix.values[j][i]) {
        throw Error("matrix is not symmetric");
      }
    }
  }

  struct Cluster {
    int id;            // dendrogram id
    int rep;           // smallest leaf index, for deterministic tie-breaks
    std::size_t size;
    bool active = true;
  };
  std::vector<Cluster> clusters;
  clusters.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    clusters.push_back({static_cast<int>(i), static_cast<int>(i), 1, true});
  }
  // dist[a][b]: unweighted mean distance between members of a and b
  std::vector<std::vector<double>> dist(2 * n - 1, std::vector<double>(2 * n - 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i][j] = matrix.values[i][j];
  }

  Dendrogram out;
  out.labels = matrix.labels;
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);

  while (active.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    int best_lo = 0, best_hi = 0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const std::size_t ia = active[a], ib = active[b];
        const double d = dist[ia][ib];
        int lo = clusters[ia].rep, hi = clusters[ib].rep;
        if (lo > hi) std::swap(lo, hi);
        const bool better =
            d < best ||
            (d == best && (lo < best_lo || (lo == best_lo && hi < best_hi)));
        if (better) {
          best = d;
          bi = ia;
          bj = ib;
          best_lo = lo;
          best_hi = hi;
        }
      }
    }

    const std::size_t new_index = clusters.size();
    Cluster merged;
    merged.id = static_cast<int>(n + out.merges.size());
    merged.rep = std::min(clusters[bi].rep, clusters[bj].rep);
    merged.size = clusters[bi].size + clusters[bj].size;

    int left = clusters[bi].id, right = clusters[bj].id;
    if (left > right) std::swap(left, right);
    out.merges.push_back(Merge{left, right, best, merged.size});

    // Lance-Williams update for unweighted average linkage.
    const double wi = static_cast<double>(clusters[bi].size);
    const double wj = static_cast<double>(clusters[bj].size);
    for (const std::size_t other : active) {
      if (other == bi || other == bj) continue;
      const double d = (wi * dist[bi][other] + wj * dist[bj][other]) / (wi + wj);
      dist[new_index][other] = d;
      dist[other][new_index] = d;
    }
    clusters[bi].active = false;
    clusters[bj].active = false;
    clusters.push_back(merged);
    active.erase(std::remove(active.begin(), active.end(), bi), active.end());
    active.erase(std::remove(active.begin(), active.end(), bj), active.end());
    active.push_back(new_index);
  }
  return out;
}

std::vector<int> cut(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.labels.size();
  if (k < 1 || k > n) throw Error(fmt::format("k={} outside [1, {}]", k, n));

  // Apply the first n-k merges with union-find, then number the resulting
  // clusters by their first leaf.
  std::vector<int> parent(n + dendrogram.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  const std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      x = parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    }
    return x;
  };
  for (std::size_t m = 0; m + k < n; ++m) {
    const Merge& merge = dendrogram.merges[m];
    const int target = static_cast<int>(n + m);
    parent[static_cast<std::size_t>(find(merge.left))] = target;
    parent[static_cast<std::size_t>(find(merge.right))] = target;
  }

  std::vector<int> labels(n, -1);
  std::map<int, int> cluster_ids;
  for (std::size_t i = 0; i < n; ++i) {
    const int root = find(static_cast<int>(i));
    const auto [it, inserted] =
        cluster_ids.try_emplace(root, static_cast<int>(cluster_ids.size()));
    labels[i] = it->second;
  }
  return labels;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw Error("labelings differ in length");
  if (a.size() < 2) throw Error("adjusted Rand index needs >= 2 items");

  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  const auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double index = 0.0, row_pairs = 0.0, col_pairs = 0.0;
  for (const auto& [key, m] : cells) index += choose2(m);
  for (const auto& [key, m] : rows) row_pairs += choose2(m);
  for (const auto& [key, m] : cols) col_pairs += choose2(m);
  const double total_pairs = choose2(static_cast<double>(a.size()));
  const double expected = row_pairs * col_pairs / total_pairs;
  const double max_index = 0.5 * (row_pairs + col_pairs);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (max_index - expected);
}

AriSweepResult ari_sweep(const Dendrogram& dendrogram,
                         std::span<const int> reference) {
  const std::size_t n = dendrogram.labels.size();
  if (reference.size() != n) {
    throw Error("reference labeling does not cover all leaves");
  }
  AriSweepResult result;
  result.best_ari = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 2; k <= n; ++k) {
    const auto labels = cut(dendrogram, k);
    const double ari = adjusted_rand_index(labels, reference);
    result.rows.push_back({k, ari});
    if (ari > result.best_ari) {
      result.best_ari = ari;
      result.best_k = k;
    }
  }
  return result;
}

std::vector<int> dense_labels(const std::vector<std::string>& labels) {
  std::map<std::string, int> ids;
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    const auto [it, inserted] =
        ids.try_emplace(label, static_cast<int>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

}  // namespace subcoda
