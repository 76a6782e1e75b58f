#include "subcoda/metric.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "subcoda/parallel.hpp"

namespace subcoda {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

void DistanceMatrix::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write matrix file '{}'", path.string()));
  out << "label";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels[i];
    for (std::size_t j = 0; j < labels.size(); ++j) {
      out << ',' << fmt::format("{}", values[i][j]);
    }
    out << '\n';
  }
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

DistanceMatrix DistanceMatrix::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open matrix file '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw Error("empty matrix file");
  if (line.ends_with('\r')) line.pop_back();
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "label") {
    throw Error("matrix header must be 'label,<labels...>'");
  }
  DistanceMatrix m;
  m.labels.assign(header.begin() + 1, header.end());
  const std::size_t n = m.labels.size();
  while (std::getline(in, line)) {
    if (line.ends_with('\r')) line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != n + 1) {
      throw Error(fmt::format("matrix row has {} fields, want {}", fields.size(), n + 1));
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < n; ++j) {
      try {
        row.push_back(std::stod(fields[j + 1]));
      } catch (const std::exception&) {
        throw Error(fmt::format("bad matrix entry '{}'", fields[j + 1]));
      }
    }
    m.values.push_back(std::move(row));
  }
  if (m.values.size() != n) throw Error("matrix is not square");
  m.symmetric = true;
  for (std::size_t i = 0; i < n && m.symmetric; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m.values[i][j] != m.values[j][i]) {
        m.symmetric = false;
        break;
      }
    }
  }
  return m;
}

double divergence(const ContextTree& from, const ContextTree& to) {
  if (from.alphabet_size() != to.alphabet_size()) {
    throw Error("divergence: trees built over different alphabets");
  }
  const std::size_t n = from.alphabet_size();
  double total = 0.0;
  std::size_t contexts = 0;
  from.for_each_context([&](const ContextNode& w) {
    const ContextNode& mapped = to.lookup(w.context());
    double kl = 0.0;
    const double n_w = static_cast<double>(w.count());
    for (const auto& [x, c] : w.next_counts()) {
      const double q = static_cast<double>(c) / n_w;
      kl += q * std::log(q / mapped.smoothed_probability(x, n));
    }
    total += std::max(kl, 0.0);
    ++contexts;
  });
  return total / static_cast<double>(contexts);
}

double symmetric_distance(const ContextTree& a, const ContextTree& b) {
  return std::max(divergence(a, b), divergence(b, a));
}

DistanceMatrix distance_matrix(
    const std::vector<std::pair<std::string, const ContextTree*>>& trees,
    DistanceMode mode, int threads) {
  if (trees.size() < 2) throw Error("distance matrix needs at least 2 trees");
  const std::size_t n = trees.size();
  DistanceMatrix m;
  m.symmetric = mode == DistanceMode::symmetric;
  m.labels.reserve(n);
  for (const auto& [label, tree] : trees) m.labels.push_back(label);
  m.values.assign(n, std::vector<double>(n, 0.0));

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = (m.symmetric ? i + 1 : 0); j < n; ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    if (m.symmetric) {
      const double d = symmetric_distance(*trees[i].second, *trees[j].second);
      m.values[i][j] = d;
      m.values[j][i] = d;
    } else {
      m.values[i][j] = divergence(*trees[i].second, *trees[j].second);
    }
  });
  return m;
}

}  // namespace subcoda
