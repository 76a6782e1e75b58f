// Command-line front end: fit subcoda trees from annotated coda data,
// compare and cluster them, and run the statistical analyses.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "subcoda/cluster.hpp"
#include "subcoda/ingest.hpp"
#include "subcoda/markov.hpp"
#include "subcoda/metric.hpp"
#include "subcoda/pipeline.hpp"
#include "subcoda/stats.hpp"
#include "subcoda/vlmc.hpp"

namespace {

using namespace subcoda;

struct CliOptions {
  RunConfig config;
  std::string threshold_text = "auto";

  void resolve() {
    if (threshold_text != "auto") {
      try {
        config.threshold = std::stod(threshold_text);
      } catch (const std::exception&) {
        throw Error(fmt::format("bad --threshold value '{}'", threshold_text));
      }
    }
  }
};

void add_global_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--delta-t", opt.config.delta_t, "bin width in seconds")
      ->capture_default_str();
  cmd->add_option("--t-max", opt.config.t_max, "ICI truncation in seconds")
      ->capture_default_str();
  cmd->add_option("--depth", opt.config.depth, "maximum context length")
      ->capture_default_str();
  cmd->add_option("--threshold", opt.threshold_text,
                  "information-gain threshold K, or 'auto'")
      ->capture_default_str();
  cmd->add_option("--min-codas", opt.config.min_codas,
                  "minimum codas per fitted group")
      ->capture_default_str();
  cmd->add_option("--seed", opt.config.seed, "random seed")->capture_default_str();
  cmd->add_option("--threads", opt.config.threads, "worker threads")
      ->capture_default_str();
  cmd->add_option("--out", opt.config.out_dir, "output directory")
      ->capture_default_str();
}

std::vector<std::pair<std::string, ContextTree>> load_trees(
    const std::vector<std::string>& files, const std::string& dir) {
  std::vector<std::filesystem::path> paths;
  for (const auto& f : files) paths.emplace_back(f);
  if (!dir.empty()) {
    std::vector<std::filesystem::path> found;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() == ".json" &&
          entry.path().filename() != "manifest.json" &&
          entry.path().filename() != "config.json") {
        found.push_back(entry.path());
      }
    }
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw Error("no tree files given");
  std::vector<std::pair<std::string, ContextTree>> trees;
  for (const auto& p : paths) {
    trees.emplace_back(p.stem().string(), ContextTree::load(p));
  }
  return trees;
}

std::map<std::string, std::string> load_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open labels file '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line)) throw Error("empty labels file");
  if (line.ends_with('\r')) line.pop_back();
  if (line != "item,label") throw Error("labels header must be 'item,label'");
  std::map<std::string, std::string> out;
  while (std::getline(in, line)) {
    if (line.ends_with('\r')) line.pop_back();
    if (line.empty()) continue;
    const auto pos = line.find(',');
    if (pos == std::string::npos) throw Error(fmt::format("bad labels row '{}'", line));
    out[line.substr(0, pos)] = line.substr(pos + 1);
  }
  return out;
}

std::vector<std::string> labels_for(const DistanceMatrix& matrix,
                                    const std::map<std::string, std::string>& by_item) {
  std::vector<std::string> out;
  for (const auto& item : matrix.labels) {
    const auto it = by_item.find(item);
    if (it == by_item.end()) {
      throw Error(fmt::format("no label for matrix item '{}'", item));
    }
    out.push_back(it->second);
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"subcoda tree toolkit: variable-length Markov chain models of "
               "tokenized inter-click interval sequences"};
  app.require_subcommand(1);

  CliOptions opt;
  opt.config.out_dir = "out";

  // ---- fit ----------------------------------------------------------
  std::string fit_input, fit_group = "sample";
  auto* fit_cmd = app.add_subcommand("fit", "fit one tree per group");
  fit_cmd->add_option("--input", fit_input, "coda CSV")->required();
  fit_cmd->add_option("--group-by", fit_group, "sample|unit|clan")
      ->capture_default_str();
  add_global_flags(fit_cmd, opt);

  // ---- dist ---------------------------------------------------------
  std::vector<std::string> dist_trees;
  std::string dist_dir, dist_mode = "symmetric";
  auto* dist_cmd = app.add_subcommand("dist", "pairwise tree distance matrix");
  dist_cmd->add_option("trees", dist_trees, "tree JSON files");
  dist_cmd->add_option("--tree-dir", dist_dir, "directory of tree JSON files");
  dist_cmd->add_option("--mode", dist_mode, "symmetric|asymmetric")
      ->capture_default_str();
  add_global_flags(dist_cmd, opt);

  // ---- cluster ------------------------------------------------------
  std::string cluster_matrix, cluster_labels;
  std::size_t cluster_k = 2;
  auto* cluster_cmd = app.add_subcommand("cluster", "average-linkage clustering");
  cluster_cmd->add_option("--matrix", cluster_matrix, "distance matrix CSV")->required();
  cluster_cmd->add_option("--k", cluster_k, "cluster count for the cut")
      ->capture_default_str();
  cluster_cmd->add_option("--labels", cluster_labels,
                          "item,label CSV for ARI against a reference");
  add_global_flags(cluster_cmd, opt);

  // ---- within-between -------------------------------------------------
  std::string wb_matrix, wb_labels;
  auto* wb_cmd = app.add_subcommand("within-between",
                                    "split distances by group and test them");
  wb_cmd->add_option("--matrix", wb_matrix, "distance matrix CSV")->required();
  wb_cmd->add_option("--labels", wb_labels, "item,label CSV")->required();
  add_global_flags(wb_cmd, opt);

  // ---- regress-overlap ------------------------------------------------
  std::string ro_input, ro_overlap, ro_codas = "all";
  bool ro_by_type = false;
  auto* ro_cmd = app.add_subcommand("regress-overlap",
                                    "clan overlap versus vocal-style distance");
  ro_cmd->add_option("--input", ro_input, "coda CSV")->required();
  ro_cmd->add_option("--overlap", ro_overlap, "overlap matrix CSV")->required();
  ro_cmd->add_option("--codas", ro_codas, "id|nonid|all")->capture_default_str();
  ro_cmd->add_flag("--by-coda-type", ro_by_type, "also regress per coda type");
  add_global_flags(ro_cmd, opt);

  // ---- markov-scan ----------------------------------------------------
  std::string ms_input, ms_scope = "pooled";
  int ms_hmin = 0, ms_hmax = 5;
  auto* ms_cmd = app.add_subcommand("markov-scan", "fixed-order memory scan");
  ms_cmd->add_option("--input", ms_input, "coda CSV")->required();
  ms_cmd->add_option("--h-min", ms_hmin, "smallest order")->capture_default_str();
  ms_cmd->add_option("--h-max", ms_hmax, "largest order")->capture_default_str();
  ms_cmd->add_option("--scope", ms_scope, "pooled|sample")->capture_default_str();
  add_global_flags(ms_cmd, opt);

  // ---- resolution-scan -------------------------------------------------
  std::string rs_input;
  std::vector<double> rs_deltas;
  auto* rs_cmd = app.add_subcommand("resolution-scan",
                                    "AIC(vlmc) - AIC(order 0) per delta_t");
  rs_cmd->add_option("--input", rs_input, "coda CSV")->required();
  rs_cmd->add_option("--delta-ts", rs_deltas, "comma-separated bin widths")
      ->required()
      ->delimiter(',');
  add_global_flags(rs_cmd, opt);

  // ---- generate ---------------------------------------------------------
  std::string gen_tree, gen_sample_id = "synthetic", gen_clan;
  std::size_t gen_n = 100;
  auto* gen_cmd = app.add_subcommand("generate", "sample synthetic codas from a tree");
  gen_cmd->add_option("--tree", gen_tree, "tree JSON file")->required();
  gen_cmd->add_option("--n-codas", gen_n, "codas to generate")->capture_default_str();
  gen_cmd->add_option("--sample-id", gen_sample_id, "sample_id for the output rows")
      ->capture_default_str();
  gen_cmd->add_option("--clan", gen_clan, "clan label for the output rows");
  add_global_flags(gen_cmd, opt);

  // ---- classify ---------------------------------------------------------
  std::string cl_models, cl_input;
  auto* cl_cmd = app.add_subcommand("classify",
                                    "assign codas to the highest-likelihood model");
  cl_cmd->add_option("--models", cl_models, "directory of per-clan tree JSON files")
      ->required();
  cl_cmd->add_option("--input", cl_input, "coda CSV")->required();
  add_global_flags(cl_cmd, opt);

  // ---- pipeline -----------------------------------------------------------
  auto* pipe_cmd = app.add_subcommand("pipeline", "end-to-end analyses");
  pipe_cmd->require_subcommand(1);
  std::string pcr_input, pcr_group = "sample";
  auto* pcr_cmd = pipe_cmd->add_subcommand(
      "clan-recovery", "fit, distance, cluster and test against clan labels");
  pcr_cmd->add_option("--input", pcr_input, "coda CSV")->required();
  pcr_cmd->add_option("--group-by", pcr_group, "sample|unit")->capture_default_str();
  add_global_flags(pcr_cmd, opt);

  std::string pgc_input;
  auto* pgc_cmd = pipe_cmd->add_subcommand(
      "generate-classify", "train/held-out split, synthesis and accuracy report");
  pgc_cmd->add_option("--input", pgc_input, "coda CSV")->required();
  add_global_flags(pgc_cmd, opt);

  CLI11_PARSE(app, argc, argv);
  opt.resolve();
  RunConfig& config = opt.config;

  if (fit_cmd->parsed()) {
    config.input = fit_input;
    const Dataset dataset = load_dataset(config.input);
    const FitReport report = cmd_fit(dataset, config, parse_grouping(fit_group));
    std::cout << fmt::format("fitted {} trees ({} groups skipped) -> {}\n",
                             report.groups.size(), report.skipped.size(),
                             config.out_dir.string());
    return 0;
  }

  if (dist_cmd->parsed()) {
    const auto trees = load_trees(dist_trees, dist_dir);
    if (trees.size() < 2) throw Error("need at least 2 tree files");
    std::vector<std::pair<std::string, const ContextTree*>> refs;
    for (const auto& [label, tree] : trees) refs.emplace_back(label, &tree);
    DistanceMode mode;
    if (dist_mode == "symmetric") {
      mode = DistanceMode::symmetric;
    } else if (dist_mode == "asymmetric") {
      mode = DistanceMode::asymmetric;
    } else {
      throw Error("--mode must be symmetric|asymmetric");
    }
    const DistanceMatrix m = distance_matrix(refs, mode, config.threads);
    OutputDir out(config.out_dir);
    m.save_csv(out.file("distance.csv"));
    write_config(config, out);
    out.commit();
    std::cout << fmt::format("{0}x{0} matrix -> {1}\n", m.size(),
                             config.out_dir.string());
    return 0;
  }

  if (cluster_cmd->parsed()) {
    const DistanceMatrix m = DistanceMatrix::load_csv(cluster_matrix);
    const Dendrogram d = average_linkage(m);
    const auto assignment = cut(d, cluster_k);
    OutputDir out(config.out_dir);
    d.save(out.file("dendrogram.json"));
    {
      std::ofstream nwk(out.file("dendrogram.nwk"));
      nwk << d.to_newick() << '\n';
    }
    {
      std::ofstream csv(out.file("clusters.csv"));
      csv << "item,cluster\n";
      for (std::size_t i = 0; i < m.labels.size(); ++i) {
        csv << fmt::format("{},{}\n", m.labels[i], assignment[i]);
      }
    }
    nlohmann::ordered_json doc;
    doc["k"] = cluster_k;
    if (!cluster_labels.empty()) {
      const auto reference = labels_for(m, load_labels_csv(cluster_labels));
      doc["ari_at_k"] = adjusted_rand_index(assignment, dense_labels(reference));
      const auto sweep = ari_sweep(d, dense_labels(reference));
      doc["ari_best"] = sweep.best_ari;
      doc["ari_best_k"] = sweep.best_k;
      auto rows = nlohmann::ordered_json::array();
      for (const auto& row : sweep.rows) {
        rows.push_back({{"k", row.k}, {"ari", row.ari}});
      }
      doc["ari_sweep"] = std::move(rows);
    }
    write_json(doc, out.file("report.json"));
    write_config(config, out);
    out.commit();
    std::cout << fmt::format("clustered {} items -> {}\n", m.size(),
                             config.out_dir.string());
    return 0;
  }

  if (wb_cmd->parsed()) {
    const DistanceMatrix m = DistanceMatrix::load_csv(wb_matrix);
    const auto labels = labels_for(m, load_labels_csv(wb_labels));
    const WithinBetween wb = within_between(m, labels);
    OutputDir out(config.out_dir);
    {
      std::ofstream csv(out.file("within_between.csv"));
      csv << "kind,value\n";
      for (const double v : wb.within) csv << fmt::format("within,{}\n", v);
      for (const double v : wb.between) csv << fmt::format("between,{}\n", v);
    }
    nlohmann::ordered_json doc;
    doc["within_pairs"] = wb.within.size();
    doc["between_pairs"] = wb.between.size();
    if (wb.within.size() >= 2 && wb.between.size() >= 2) {
      const TestResult ks = ks_two_sample(wb.within, wb.between);
      const TestResult t = welch_t_test(wb.within, wb.between);
      doc["ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}};
      doc["welch"] = {{"statistic", t.statistic}, {"p_value", t.p_value}};
      doc["cohens_d"] = cohens_d(wb.within, wb.between);
    }
    write_json(doc, out.file("report.json"));
    write_config(config, out);
    out.commit();
    std::cout << fmt::format("{} within / {} between pairs -> {}\n", wb.within.size(),
                             wb.between.size(), config.out_dir.string());
    return 0;
  }

  if (ro_cmd->parsed()) {
    config.input = ro_input;
    config.overlap = ro_overlap;
    const Dataset dataset = load_dataset(config.input);
    const OverlapMatrix overlap = load_overlap_matrix(config.overlap);
    const OverlapRegressionReport report = cmd_regress_overlap(
        dataset, overlap, config, parse_selection(ro_codas), ro_by_type);
    std::cout << fmt::format(
        "slope {:.4f} (p {:.4g}, r2 {:.3f}), 95% CI [{:.4f}, {:.4f}] -> {}\n",
        report.regression.slope, report.regression.p_value,
        report.regression.r_squared, report.slope_ci.lower, report.slope_ci.upper,
        config.out_dir.string());
    return 0;
  }

  if (ms_cmd->parsed()) {
    config.input = ms_input;
    const Dataset dataset = load_dataset(config.input);
    OutputDir out(config.out_dir);
    std::ofstream csv(out.file("markov_scan.csv"));
    csv << "scope,h,histories,mean_prob,var_prob,nonzero_per_history,aic\n";
    const auto emit = [&](const std::string& scope, const SymbolStream& stream) {
      for (const auto& row : scan_orders(stream, ms_hmin, ms_hmax)) {
        csv << fmt::format("{},{},{},{},{},{},{}\n", scope, row.order, row.histories,
                           row.mean_probability, row.var_probability,
                           row.nonzero_per_history, row.aic);
      }
    };
    if (ms_scope == "pooled") {
      std::vector<CodaRecord> all;
      for (const auto& s : dataset.samples) {
        all.insert(all.end(), s.records.begin(), s.records.end());
      }
      emit("pooled", encode_records(all, config.discretization()));
    } else if (ms_scope == "sample") {
      for (const auto& s : dataset.samples) {
        emit(s.sample_id, encode_sample(s, config.discretization()));
      }
    } else {
      throw Error("--scope must be pooled|sample");
    }
    write_config(config, out);
    out.commit();
    std::cout << fmt::format("order scan h={}..{} -> {}\n", ms_hmin, ms_hmax,
                             config.out_dir.string());
    return 0;
  }

  if (rs_cmd->parsed()) {
    config.input = rs_input;
    const Dataset dataset = load_dataset(config.input);
    OutputDir out(config.out_dir);
    std::ofstream csv(out.file("resolution_scan.csv"));
    csv << "sample,delta_t,aic_vlmc,aic_order0,difference,is_best\n";
    for (const auto& s : dataset.samples) {
      const auto rows =
          resolution_scan(s, rs_deltas, config.t_max, config.fit_config());
      const double best = best_resolution(rows);
      for (const auto& row : rows) {
        csv << fmt::format("{},{},{},{},{},{}\n", s.sample_id, row.delta_t,
                           row.aic_vlmc, row.aic_order0, row.difference,
                           row.delta_t == best ? 1 : 0);
      }
    }
    write_config(config, out);
    out.commit();
    std::cout << fmt::format("resolution scan over {} samples -> {}\n",
                             dataset.samples.size(), config.out_dir.string());
    return 0;
  }

  if (gen_cmd->parsed()) {
    const ContextTree tree = ContextTree::load(gen_tree);
    const auto codas = tree.generate(gen_n, config.seed);
    OutputDir out(config.out_dir);
    std::ofstream csv(out.file("synthetic.csv"));
    csv << "coda_id,sample_id,unit_id,clan,coda_type,id_flag,icis\n";
    std::size_t written = 0, empty = 0;
    for (std::size_t i = 0; i < codas.size(); ++i) {
      if (codas[i].size() < 2) {  // lone end symbol carries no ICIs
        ++empty;
        continue;
      }
      std::string icis;
      for (std::size_t j = 0; j + 1 < codas[i].size(); ++j) {
        if (j > 0) icis.push_back(';');
        icis += fmt::format("{}", bin_center(codas[i][j], tree.discretization()));
      }
      csv << fmt::format("synth_{:06d},{},,{},,,{}\n", i, gen_sample_id, gen_clan,
                         icis);
      ++written;
    }
    write_config(config, out);
    out.commit();
    if (empty > 0) {
      std::cerr << fmt::format("warning: dropped {} zero-ICI codas\n", empty);
    }
    std::cout << fmt::format("wrote {} synthetic codas -> {}\n", written,
                             config.out_dir.string());
    return 0;
  }

  if (cl_cmd->parsed()) {
    config.input = cl_input;
    std::map<std::string, ContextTree> models;
    for (auto& [label, tree] : load_trees({}, cl_models)) {
      models.emplace(label, std::move(tree));
    }
    if (models.size() < 2) throw Error("classify needs at least 2 models");
    const DiscretizationConfig cfg = models.begin()->second.discretization();
    const Dataset dataset = load_dataset(config.input);
    OutputDir out(config.out_dir);
    std::ofstream csv(out.file("predictions.csv"));
    csv << "coda_id,predicted,actual\n";
    std::size_t total = 0, correct = 0, labeled = 0;
    for (const auto& s : dataset.samples) {
      for (const auto& r : s.records) {
        const auto coda = encode_coda(r, cfg);
        const std::string predicted = classify(coda, models);
        csv << fmt::format("{},{},{}\n", r.coda_id, predicted, r.clan.value_or(""));
        ++total;
        if (r.clan) {
          ++labeled;
          if (*r.clan == predicted) ++correct;
        }
      }
    }
    nlohmann::ordered_json doc;
    doc["codas"] = total;
    doc["labeled"] = labeled;
    if (labeled > 0) {
      doc["accuracy"] = static_cast<double>(correct) / static_cast<double>(labeled);
    }
    write_json(doc, out.file("report.json"));
    write_config(config, out);
    out.commit();
    std::cout << fmt::format("classified {} codas -> {}\n", total,
                             config.out_dir.string());
    return 0;
  }

  if (pcr_cmd->parsed()) {
    config.input = pcr_input;
    const Dataset dataset = load_dataset(config.input);
    const ClanRecoveryReport report =
        cmd_pipeline_clan_recovery(dataset, config, parse_grouping(pcr_group));
    std::cout << fmt::format(
        "{} groups, {} clans: ARI {:.3f} at k={}, KS p {:.4g} -> {}\n",
        report.n_groups, report.n_clans, report.ari, report.cut_k,
        report.ks.p_value, config.out_dir.string());
    return 0;
  }

  if (pgc_cmd->parsed()) {
    config.input = pgc_input;
    const Dataset dataset = load_dataset(config.input);
    const GenerateClassifyReport report = cmd_generate_and_classify(dataset, config);
    std::cout << fmt::format(
        "real accuracy {:.3f} ({} codas), synthetic accuracy {:.3f} ({} codas) -> {}\n",
        report.real_accuracy, report.real_tested, report.synthetic_accuracy,
        report.synthetic_tested, config.out_dir.string());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
