#include "subcoda/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "subcoda/parallel.hpp"
#include "subcoda/rng.hpp"

namespace subcoda {

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["input"] = input.string();
  j["overlap"] = overlap.string();
  j["out"] = out_dir.string();
  j["delta_t"] = delta_t;
  j["t_max"] = t_max;
  j["depth"] = depth;
  if (threshold) {
    j["threshold"] = *threshold;
  } else {
    j["threshold"] = "auto";
  }
  j["min_codas"] = min_codas;
  j["seed"] = seed;
  j["threads"] = threads;
  return j;
}

OutputDir::OutputDir(const std::filesystem::path& dir) : dir_(dir) {
  if (dir_.empty()) return;
  std::filesystem::create_directories(dir_);
  enabled_ = true;
}

OutputDir::~OutputDir() {
  if (committed_) return;
  for (const auto& p : written_) {
    std::error_code ec;
    std::filesystem::remove(p, ec);
  }
}

std::filesystem::path OutputDir::file(const std::string& relative) {
  if (!enabled_) throw Error("output directory not configured");
  const std::filesystem::path p = dir_ / relative;
  std::filesystem::create_directories(p.parent_path());
  written_.push_back(p);
  return p;
}

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << j.dump(2) << '\n';
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

void write_config(const RunConfig& config, OutputDir& out) {
  if (out.enabled()) write_json(config.to_json(), out.file("config.json"));
}

std::string sanitize_label(const std::string& label) {
  std::string out = label;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
    if (!ok) c = '_';
  }
  return out.empty() ? "_" : out;
}

Grouping parse_grouping(const std::string& text) {
  if (text == "sample") return Grouping::sample;
  if (text == "unit") return Grouping::unit;
  if (text == "clan") return Grouping::clan;
  throw Error(fmt::format("unknown grouping '{}' (want sample|unit|clan)", text));
}

CodaSelection parse_selection(const std::string& text) {
  if (text == "all") return CodaSelection::all;
  if (text == "id") return CodaSelection::id;
  if (text == "nonid") return CodaSelection::nonid;
  throw Error(fmt::format("unknown coda selection '{}' (want id|nonid|all)", text));
}

namespace {

using Groups = std::vector<std::pair<std::string, std::vector<CodaRecord>>>;

Groups group_records(const Dataset& dataset, Grouping grouping) {
  std::map<std::string, std::vector<CodaRecord>> by_label;
  for (const auto& sample : dataset.samples) {
    for (const auto& record : sample.records) {
      std::string label;
      switch (grouping) {
        case Grouping::sample:
          label = sample.sample_id;
          break;
        case Grouping::unit:
          if (!record.unit_id) {
            throw Error(fmt::format("coda '{}' lacks a unit annotation", record.coda_id));
          }
          label = *record.unit_id;
          break;
        case Grouping::clan:
          if (!record.clan) {
            throw Error(fmt::format("coda '{}' lacks a clan annotation", record.coda_id));
          }
          label = *record.clan;
          break;
      }
      by_label[label].push_back(record);
    }
  }
  return Groups(by_label.begin(), by_label.end());
}

std::optional<std::string> unique_clan(const std::vector<CodaRecord>& records) {
  std::set<std::string> clans;
  for (const auto& r : records) {
    if (r.clan) clans.insert(*r.clan);
  }
  if (clans.size() == 1) return *clans.begin();
  return std::nullopt;
}

std::vector<CodaRecord> select_codas(const std::vector<CodaRecord>& records,
                                     CodaSelection selection) {
  if (selection == CodaSelection::all) return records;
  std::vector<CodaRecord> out;
  for (const auto& r : records) {
    if (!r.id_flag) {
      throw Error(fmt::format("coda '{}' lacks an id_flag annotation", r.coda_id));
    }
    if (*r.id_flag == (selection == CodaSelection::id)) out.push_back(r);
  }
  return out;
}

}  // namespace

FitReport fit_groups(const Dataset& dataset, const RunConfig& config,
                     Grouping grouping) {
  if (dataset.samples.empty()) throw Error("dataset is empty");
  const Groups groups = group_records(dataset, grouping);

  FitReport report;
  std::vector<const Groups::value_type*> to_fit;
  for (const auto& group : groups) {
    if (group.second.size() < config.min_codas) {
      report.skipped.push_back({group.first, group.second.size()});
      std::cerr << fmt::format("warning: skipping group '{}' with {} codas (< {})\n",
                               group.first, group.second.size(), config.min_codas);
    } else {
      to_fit.push_back(&group);
    }
  }
  if (to_fit.empty()) throw Error("no group meets the min_codas requirement");

  std::vector<std::optional<GroupFit>> slots(to_fit.size());
  const DiscretizationConfig cfg = config.discretization();
  const FitConfig fit_cfg = config.fit_config();
  parallel_for(to_fit.size(), config.threads, [&](std::size_t i) {
    const auto& [label, records] = *to_fit[i];
    const SymbolStream stream = encode_records(records, cfg);
    GroupFit fit{label, unique_clan(records), records.size(), stream.symbols.size(),
                 ContextTree::fit(stream, fit_cfg)};
    slots[i] = std::move(fit);
  });
  for (auto& slot : slots) report.groups.push_back(std::move(*slot));
  return report;
}

FitReport cmd_fit(const Dataset& dataset, const RunConfig& config, Grouping grouping) {
  FitReport report = fit_groups(dataset, config, grouping);
  OutputDir out(config.out_dir);
  if (out.enabled()) {
    auto manifest = nlohmann::ordered_json::array();
    for (const auto& group : report.groups) {
      const std::string rel = fmt::format("trees/{}.json", sanitize_label(group.label));
      group.tree.save(out.file(rel));
      manifest.push_back({{"label", group.label},
                          {"clan", group.clan ? nlohmann::json(*group.clan)
                                              : nlohmann::json()},
                          {"file", rel},
                          {"codas", group.codas},
                          {"symbols", group.symbols},
                          {"contexts", group.tree.context_count()}});
    }
    nlohmann::ordered_json doc;
    doc["groups"] = std::move(manifest);
    auto skipped = nlohmann::ordered_json::array();
    for (const auto& s : report.skipped) {
      skipped.push_back({{"label", s.label}, {"codas", s.codas}});
    }
    doc["skipped"] = std::move(skipped);
    write_json(doc, out.file("manifest.json"));
    write_config(config, out);
  }
  out.commit();
  return report;
}

ClanRecoveryReport cmd_pipeline_clan_recovery(const Dataset& dataset,
                                              const RunConfig& config,
                                              Grouping grouping) {
  const Dataset filtered = filter_min_codas(dataset, std::max<std::size_t>(1, config.min_codas));
  FitReport fits = fit_groups(filtered, config, grouping);
  if (fits.groups.size() < 2) throw Error("clan recovery needs at least 2 groups");

  ClanRecoveryReport report;
  std::vector<std::pair<std::string, const ContextTree*>> trees;
  for (const auto& g : fits.groups) {
    if (!g.clan) {
      throw Error(fmt::format("group '{}' has no single clan annotation", g.label));
    }
    trees.emplace_back(g.label, &g.tree);
    report.group_labels.push_back(g.label);
    report.clan_labels.push_back(*g.clan);
  }
  const std::set<std::string> clans(report.clan_labels.begin(),
                                    report.clan_labels.end());
  if (clans.size() < 2) throw Error("clan recovery needs at least 2 clans");

  report.n_groups = trees.size();
  report.n_clans = clans.size();
  report.cut_k = clans.size();
  report.matrix = distance_matrix(trees, DistanceMode::symmetric, config.threads);
  report.dendrogram = average_linkage(report.matrix);

  const auto cut_labels = cut(report.dendrogram, report.cut_k);
  report.ari = adjusted_rand_index(cut_labels, dense_labels(report.clan_labels));

  const WithinBetween wb = within_between(report.matrix, report.clan_labels);
  if (wb.within.size() >= 2 && wb.between.size() >= 2) {
    report.ks = ks_two_sample(wb.within, wb.between);
    report.welch = welch_t_test(wb.within, wb.between);
    report.effect_size = cohens_d(wb.within, wb.between);
  }

  OutputDir out(config.out_dir);
  if (out.enabled()) {
    for (const auto& g : fits.groups) {
      g.tree.save(out.file(fmt::format("trees/{}.json", sanitize_label(g.label))));
    }
    report.matrix.save_csv(out.file("distance.csv"));
    report.dendrogram.save(out.file("dendrogram.json"));
    {
      std::ofstream nwk(out.file("dendrogram.nwk"));
      nwk << report.dendrogram.to_newick() << '\n';
    }
    nlohmann::ordered_json doc;
    doc["groups"] = report.n_groups;
    doc["clans"] = report.n_clans;
    doc["cut_k"] = report.cut_k;
    doc["ari"] = report.ari;
    doc["ks"] = {{"statistic", report.ks.statistic}, {"p_value", report.ks.p_value}};
    doc["welch"] = {{"statistic", report.welch.statistic},
                    {"p_value", report.welch.p_value}};
    doc["cohens_d"] = report.effect_size;
    doc["within_pairs"] = wb.within.size();
    doc["between_pairs"] = wb.between.size();
    write_json(doc, out.file("report.json"));
    write_config(config, out);
  }
  out.commit();
  return report;
}

namespace {

struct ClanTrees {
  std::vector<std::string> clans;  // fitted, sorted
  std::map<std::string, ContextTree> trees;
  std::vector<std::string> skipped;
};

ClanTrees fit_clan_trees(const Dataset& dataset, const OverlapMatrix& overlap,
                         const RunConfig& config, CodaSelection selection) {
  ClanTrees out;
  const DiscretizationConfig cfg = config.discretization();
  const FitConfig fit_cfg = config.fit_config();
  for (const auto& clan : overlap.clans) {
    const Dataset restricted = restrict_to_clan(dataset, clan);
    std::vector<CodaRecord> records;
    for (const auto& s : restricted.samples) {
      const auto selected = select_codas(s.records, selection);
      records.insert(records.end(), selected.begin(), selected.end());
    }
    if (records.size() < config.min_codas) {
      out.skipped.push_back(clan);
      std::cerr << fmt::format("warning: clan '{}' has {} selected codas (< {}), skipped\n",
                               clan, records.size(), config.min_codas);
      continue;
    }
    const SymbolStream stream = encode_records(records, cfg);
    out.trees.emplace(clan, ContextTree::fit(stream, fit_cfg));
    out.clans.push_back(clan);
  }
  return out;
}

}  // namespace

OverlapRegressionReport cmd_regress_overlap(const Dataset& dataset,
                                            const OverlapMatrix& overlap,
                                            const RunConfig& config,
                                            CodaSelection selection,
                                            bool by_coda_type) {
  OverlapRegressionReport report;
  const ClanTrees fitted = fit_clan_trees(dataset, overlap, config, selection);
  report.skipped_clans = fitted.skipped;
  if (fitted.clans.size() < 3) {
    throw Error("overlap regression needs at least 3 fitted clans");
  }

  // symmetric distances cached per unordered pair
  std::map<std::pair<std::string, std::string>, double> cache;
  for (std::size_t i = 0; i < fitted.clans.size(); ++i) {
    for (std::size_t j = i + 1; j < fitted.clans.size(); ++j) {
      const auto& a = fitted.clans[i];
      const auto& b = fitted.clans[j];
      cache[{a, b}] =
          symmetric_distance(fitted.trees.at(a), fitted.trees.at(b));
    }
  }
  for (const auto& a : fitted.clans) {
    for (const auto& b : fitted.clans) {
      if (a == b) continue;
      const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      report.rows.push_back({a, b, overlap.at(a, b), cache.at(key)});
    }
  }

  std::vector<double> x, y;
  for (const auto& row : report.rows) {
    x.push_back(row.overlap);
    y.push_back(row.distance);
  }
  report.regression = ols(x, y);
  report.slope_ci = bootstrap_slope_ci(x, y, 1000, 0.95, config.seed);

  if (by_coda_type) {
    // refit per coda type; a type must be uttered by >= 3 fitted clans
    std::set<std::string> types;
    std::map<std::string, std::map<std::string, std::vector<CodaRecord>>> per_type;
    for (const auto& clan : fitted.clans) {
      const Dataset restricted = restrict_to_clan(dataset, clan);
      for (const auto& s : restricted.samples) {
        for (const auto& r : select_codas(s.records, selection)) {
          if (!r.coda_type) continue;
          per_type[*r.coda_type][clan].push_back(r);
          types.insert(*r.coda_type);
        }
      }
    }
    const DiscretizationConfig cfg = config.discretization();
    const FitConfig fit_cfg = config.fit_config();
    for (const auto& type : types) {
      auto& clan_records = per_type[type];
      if (clan_records.size() < 3) continue;
      std::map<std::string, ContextTree> type_trees;
      for (auto& [clan, records] : clan_records) {
        const SymbolStream stream = encode_records(records, cfg);
        if (stream.symbols.size() < 2) continue;
        type_trees.emplace(clan, ContextTree::fit(stream, fit_cfg));
      }
      if (type_trees.size() < 3) continue;
      std::vector<double> tx, ty;
      std::map<std::pair<std::string, std::string>, double> tcache;
      for (auto it = type_trees.begin(); it != type_trees.end(); ++it) {
        for (auto jt = std::next(it); jt != type_trees.end(); ++jt) {
          tcache[{it->first, jt->first}] =
              symmetric_distance(it->second, jt->second);
        }
      }
      for (const auto& [a, ta] : type_trees) {
        for (const auto& [b, tb] : type_trees) {
          if (a == b) continue;
          const auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
          tx.push_back(overlap.at(a, b));
          ty.push_back(tcache.at(key));
        }
      }
      CodaTypeRow row;
      row.coda_type = type;
      row.n_clans = type_trees.size();
      row.slope = ols(tx, ty).slope;
      row.pearson_p = pearson(tx, ty).p_value;
      row.spearman_p = spearman(tx, ty).p_value;
      report.by_type.push_back(std::move(row));
    }
  }

  OutputDir out(config.out_dir);
  if (out.enabled()) {
    {
      std::ofstream csv(out.file("pairs.csv"));
      csv << "clan_a,clan_b,overlap,distance\n";
      for (const auto& row : report.rows) {
        csv << fmt::format("{},{},{},{}\n", row.clan_a, row.clan_b, row.overlap,
                           row.distance);
      }
    }
    if (by_coda_type) {
      std::ofstream csv(out.file("coda_types.csv"));
      csv << "coda_type,n_clans,slope,pearson_p,spearman_p\n";
      for (const auto& row : report.by_type) {
        csv << fmt::format("{},{},{},{},{}\n", row.coda_type, row.n_clans, row.slope,
                           row.pearson_p, row.spearman_p);
      }
    }
    nlohmann::ordered_json doc;
    doc["n_pairs"] = report.rows.size();
    doc["slope"] = report.regression.slope;
    doc["intercept"] = report.regression.intercept;
    doc["r_squared"] = report.regression.r_squared;
    doc["p_value"] = report.regression.p_value;
    doc["ci"] = {{"level", report.slope_ci.level},
                 {"lower", report.slope_ci.lower},
                 {"upper", report.slope_ci.upper},
                 {"n_resamples", report.slope_ci.n_resamples},
                 {"seed", report.slope_ci.seed}};
    doc["skipped_clans"] = report.skipped_clans;
    write_json(doc, out.file("summary.json"));
    write_config(config, out);
  }
  out.commit();
  return report;
}

GenerateClassifyReport cmd_generate_and_classify(const Dataset& dataset,
                                                 const RunConfig& config) {
  // collect codas per clan, sorted labels for stable seeding
  std::map<std::string, std::vector<CodaRecord>> per_clan;
  for (const auto& s : dataset.samples) {
    for (const auto& r : s.records) {
      if (!r.clan) continue;
      per_clan[*r.clan].push_back(r);
    }
  }
  if (per_clan.size() < 2) {
    throw Error("generate-and-classify needs at least 2 clans");
  }

  const DiscretizationConfig cfg = config.discretization();
  const FitConfig fit_cfg = config.fit_config();
  GenerateClassifyReport report;
  std::map<std::string, ContextTree> models;
  std::map<std::string, std::vector<CodaRecord>> held_out;
  std::map<std::string, std::vector<std::vector<Symbol>>> synthetic;

  std::size_t clan_index = 0;
  for (auto& [clan, records] : per_clan) {
    if (records.size() < config.min_codas) {
      std::cerr << fmt::format("warning: clan '{}' has {} codas (< {}), skipped\n",
                               clan, records.size(), config.min_codas);
      ++clan_index;
      continue;
    }
    // seeded Fisher-Yates, then an 80/20 split
    Rng rng(Rng::derive(config.seed, clan_index));
    for (std::size_t i = records.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.next_below(i + 1));
      std::swap(records[i], records[j]);
    }
    const std::size_t test_count = std::max<std::size_t>(1, records.size() / 5);
    const std::size_t train_count = records.size() - test_count;
    if (train_count < 1) throw Error(fmt::format("clan '{}' too small to split", clan));

    std::vector<CodaRecord> train(records.begin(), records.begin() + train_count);
    held_out[clan].assign(records.begin() + train_count, records.end());

    const SymbolStream stream = encode_records(train, cfg);
    ContextTree tree = ContextTree::fit(stream, fit_cfg);
    synthetic[clan] =
        tree.generate(test_count, Rng::derive(config.seed, 0x10000 + clan_index));
    models.emplace(clan, std::move(tree));
    report.clans.push_back(clan);
    ++clan_index;
  }
  if (models.size() < 2) {
    throw Error("fewer than 2 clans meet the min_codas requirement");
  }

  std::size_t real_correct = 0;
  for (const auto& [clan, records] : held_out) {
    for (const auto& r : records) {
      const auto coda = encode_coda(r, cfg);
      if (classify(coda, models) == clan) ++real_correct;
      ++report.real_tested;
    }
  }
  std::size_t synth_correct = 0;
  for (const auto& [clan, codas] : synthetic) {
    for (const auto& coda : codas) {
      if (classify(coda, models) == clan) ++synth_correct;
      ++report.synthetic_tested;
    }
  }
  report.real_accuracy =
      static_cast<double>(real_correct) / static_cast<double>(report.real_tested);
  report.synthetic_accuracy = static_cast<double>(synth_correct) /
                              static_cast<double>(report.synthetic_tested);

  OutputDir out(config.out_dir);
  if (out.enabled()) {
    nlohmann::ordered_json doc;
    doc["clans"] = report.clans;
    doc["real_accuracy"] = report.real_accuracy;
    doc["synthetic_accuracy"] = report.synthetic_accuracy;
    doc["real_tested"] = report.real_tested;
    doc["synthetic_tested"] = report.synthetic_tested;
    write_json(doc, out.file("report.json"));
    write_config(config, out);
  }
  out.commit();
  return report;
}

}  // namespace subcoda
