#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "subcoda/cluster.hpp"
#include "subcoda/ingest.hpp"
#include "subcoda/markov.hpp"
#include "subcoda/metric.hpp"
#include "subcoda/stats.hpp"
#include "subcoda/tokenize.hpp"
#include "subcoda/vlmc.hpp"

namespace subcoda {

/// Resolved configuration shared by all commands; echoed as config.json
/// next to every command's outputs so runs are reproducible.
struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path overlap;
  std::filesystem::path out_dir;  // empty = keep results in memory only
  double delta_t = 0.05;
  double t_max = 1.0;
  int depth = 10;
  std::optional<double> threshold;  // nullopt = chi-square default
  std::size_t min_codas = 200;
  std::uint64_t seed = 1;
  int threads = 1;

  DiscretizationConfig discretization() const { return {delta_t, t_max}; }
  FitConfig fit_config() const { return {depth, threshold}; }
  nlohmann::ordered_json to_json() const;
};

/// Collects files written by a command so a failed run can remove its
/// partial outputs. Files survive only after commit().
class OutputDir {
 public:
  OutputDir() = default;
  explicit OutputDir(const std::filesystem::path& dir);
  ~OutputDir();
  OutputDir(const OutputDir&) = delete;
  OutputDir& operator=(const OutputDir&) = delete;

  bool enabled() const { return enabled_; }
  const std::filesystem::path& dir() const { return dir_; }
  /// Resolves a relative file path, creating parent directories, and
  /// records it for rollback.
  std::filesystem::path file(const std::string& relative);
  void commit() { committed_ = true; }

 private:
  std::filesystem::path dir_;
  bool enabled_ = false;
  bool committed_ = false;
  std::vector<std::filesystem::path> written_;
};

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);
void write_config(const RunConfig& config, OutputDir& out);
std::string sanitize_label(const std::string& label);

enum class Grouping { sample, unit, clan };
Grouping parse_grouping(const std::string& text);

enum class CodaSelection { all, id, nonid };
CodaSelection parse_selection(const std::string& text);

struct GroupFit {
  std::string label;
  std::optional<std::string> clan;
  std::size_t codas = 0;
  std::size_t symbols = 0;
  ContextTree tree;
};

struct SkippedGroup {
  std::string label;
  std::size_t codas = 0;
};

struct FitReport {
  std::vector<GroupFit> groups;     // sorted by label
  std::vector<SkippedGroup> skipped;
};

/// Fits one context tree per group (sample, unit or clan). Groups below
/// min_codas are skipped and reported. Fitting runs across threads; the
/// output order is fixed by label sort.
FitReport fit_groups(const Dataset& dataset, const RunConfig& config,
                     Grouping grouping);

/// fit_groups plus tree/manifest output files.
FitReport cmd_fit(const Dataset& dataset, const RunConfig& config, Grouping grouping);

struct ClanRecoveryReport {
  std::size_t n_groups = 0;
  std::size_t n_clans = 0;
  std::size_t cut_k = 0;
  double ari = 0.0;
  TestResult ks;
  TestResult welch;
  double effect_size = 0.0;
  DistanceMatrix matrix;
  Dendrogram dendrogram;
  std::vector<std::string> group_labels;
  std::vector<std::string> clan_labels;  // reference, per group
};

/// Full recovery pipeline: fit per group, symmetric distances, average
/// linkage, cut at the reference clan count, ARI plus within/between tests.
ClanRecoveryReport cmd_pipeline_clan_recovery(const Dataset& dataset,
                                              const RunConfig& config,
                                              Grouping grouping = Grouping::sample);

struct OverlapPairRow {
  std::string clan_a;
  std::string clan_b;
  double overlap = 0.0;
  double distance = 0.0;
};

struct CodaTypeRow {
  std::string coda_type;
  std::size_t n_clans = 0;
  double slope = 0.0;
  double pearson_p = 1.0;
  double spearman_p = 1.0;
};

struct OverlapRegressionReport {
  std::vector<OverlapPairRow> rows;  // both directed pairs per clan pair
  RegressionResult regression;
  BootstrapCI slope_ci;
  std::vector<std::string> skipped_clans;
  std::vector<CodaTypeRow> by_type;  // only in per-type mode
};

/// Overlap-versus-style regression over all directed clan pairs of the
/// overlap matrix. Selection picks identity, non-identity or all codas.
/// Per-type mode refits trees per coda type and skips types uttered by
/// fewer than three clans.
OverlapRegressionReport cmd_regress_overlap(const Dataset& dataset,
                                            const OverlapMatrix& overlap,
                                            const RunConfig& config,
                                            CodaSelection selection,
                                            bool by_coda_type = false);

struct GenerateClassifyReport {
  double real_accuracy = 0.0;
  double synthetic_accuracy = 0.0;
  std::size_t real_tested = 0;
  std::size_t synthetic_tested = 0;
  std::vector<std::string> clans;
};

/// Fits per-clan trees on a seeded 80/20 split, generates synthetic codas
/// from each fitted tree, and reports likelihood-classifier accuracy on the
/// held-out real codas and on the synthetic ones.
GenerateClassifyReport cmd_generate_and_classify(const Dataset& dataset,
                                                 const RunConfig& config);

}  // namespace subcoda
