#include "subcoda/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace subcoda {

namespace {

constexpr const char* kHeader =
    "coda_id,sample_id,unit_id,clan,coda_type,id_flag,icis";

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

double parse_double(const std::string& text, std::size_t row, const char* what) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(fmt::format("row {}: malformed {} '{}'", row, what, text));
  }
  return value;
}

std::optional<std::string> opt_field(std::string s) {
  if (s.empty()) return std::nullopt;
  return s;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string format_icis(const std::vector<double>& icis) {
  std::string out;
  for (std::size_t i = 0; i < icis.size(); ++i) {
    if (i > 0) out.push_back(';');
    out += fmt::format("{}", icis[i]);
  }
  return out;
}

}  // namespace

std::size_t Dataset::coda_count() const {
  std::size_t n = 0;
  for (const auto& s : samples) n += s.records.size();
  return n;
}

std::vector<std::string> Dataset::clan_labels() const {
  std::vector<std::string> out;
  for (const auto& s : samples) {
    for (const auto& r : s.records) {
      if (r.clan && std::find(out.begin(), out.end(), *r.clan) == out.end()) {
        out.push_back(*r.clan);
      }
    }
  }
  return out;
}

std::size_t OverlapMatrix::index_of(const std::string& clan) const {
  const auto it = std::find(clans.begin(), clans.end(), clan);
  if (it == clans.end()) {
    throw Error(fmt::format("clan '{}' not present in overlap matrix", clan));
  }
  return static_cast<std::size_t>(it - clans.begin());
}

double OverlapMatrix::at(const std::string& row_clan,
                         const std::string& col_clan) const {
  return values[index_of(row_clan)][index_of(col_clan)];
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open dataset file '{}'", path.string()));

  std::string line;
  if (!std::getline(in, line)) throw Error("empty dataset file");
  if (line.ends_with('\r')) line.pop_back();
  if (line != kHeader) {
    throw Error(fmt::format("unexpected header '{}' (want '{}')", line, kHeader));
  }

  Dataset dataset;
  dataset.source = path.string();
  dataset.loaded_at = iso_now();

  std::map<std::string, std::size_t> sample_index;
  std::set<std::string> seen_coda_ids;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.ends_with('\r')) line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 7) {
      throw Error(fmt::format("row {}: expected 7 fields, got {}", row, fields.size()));
    }

    CodaRecord rec;
    rec.coda_id = fields[0];
    rec.sample_id = fields[1];
    rec.unit_id = opt_field(fields[2]);
    rec.clan = opt_field(fields[3]);
    rec.coda_type = opt_field(fields[4]);
    if (rec.coda_id.empty()) throw Error(fmt::format("row {}: empty coda_id", row));
    if (rec.sample_id.empty()) throw Error(fmt::format("row {}: empty sample_id", row));
    if (!seen_coda_ids.insert(rec.coda_id).second) {
      throw Error(fmt::format("row {}: duplicate coda_id '{}'", row, rec.coda_id));
    }

    if (!fields[5].empty()) {
      if (fields[5] == "true") rec.id_flag = true;
      else if (fields[5] == "false") rec.id_flag = false;
      else throw Error(fmt::format("row {}: bad id_flag '{}'", row, fields[5]));
    }

    if (fields[6].empty()) throw Error(fmt::format("row {}: empty ICI list", row));
    for (const auto& part : split(fields[6], ';')) {
      const double ici = parse_double(part, row, "ICI");
      if (!std::isfinite(ici) || ici <= 0.0) {
        throw Error(fmt::format("row {}: ICI {} out of range (must be finite and > 0)", row, ici));
      }
      rec.icis.push_back(ici);
    }

    auto [it, inserted] = sample_index.try_emplace(rec.sample_id, dataset.samples.size());
    if (inserted) {
      dataset.samples.push_back(CodaSample{rec.sample_id, std::nullopt, {}});
    }
    dataset.samples[it->second].records.push_back(std::move(rec));
  }

  // A sample's clan is set when exactly one clan label appears among its records.
  for (auto& sample : dataset.samples) {
    std::set<std::string> clans;
    for (const auto& r : sample.records) {
      if (r.clan) clans.insert(*r.clan);
    }
    if (clans.size() == 1) sample.clan = *clans.begin();
  }
  return dataset;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write dataset file '{}'", path.string()));
  out << kHeader << '\n';
  for (const auto& sample : dataset.samples) {
    for (const auto& r : sample.records) {
      out << fmt::format("{},{},{},{},{},{},{}\n", r.coda_id, r.sample_id,
                         r.unit_id.value_or(""), r.clan.value_or(""),
                         r.coda_type.value_or(""),
                         r.id_flag ? (*r.id_flag ? "true" : "false") : "",
                         format_icis(r.icis));
    }
  }
  if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

Dataset filter_min_codas(const Dataset& dataset, std::size_t min_codas) {
  if (min_codas < 1) throw Error("filter_min_codas: min must be >= 1");
  Dataset out;
  out.source = dataset.source;
  out.loaded_at = dataset.loaded_at;
  for (const auto& s : dataset.samples) {
    if (s.records.size() >= min_codas) out.samples.push_back(s);
  }
  return out;
}

Dataset restrict_to_clan(const Dataset& dataset, const std::string& clan) {
  Dataset out;
  out.source = dataset.source;
  out.loaded_at = dataset.loaded_at;
  for (const auto& s : dataset.samples) {
    CodaSample kept{s.sample_id, s.clan, {}};
    for (const auto& r : s.records) {
      if (r.clan && *r.clan == clan) kept.records.push_back(r);
    }
    if (!kept.records.empty()) out.samples.push_back(std::move(kept));
  }
  return out;
}

std::pair<Dataset, Dataset> partition_id_nonid(const Dataset& dataset,
                                               const std::string& clan) {
  Dataset id_part, nonid_part;
  id_part.source = nonid_part.source = dataset.source;
  id_part.loaded_at = nonid_part.loaded_at = dataset.loaded_at;
  for (const auto& s : dataset.samples) {
    CodaSample id_sample{s.sample_id, s.clan, {}};
    CodaSample nonid_sample{s.sample_id, s.clan, {}};
    for (const auto& r : s.records) {
      if (!r.clan || *r.clan != clan) continue;
      if (!r.id_flag) {
        throw Error(fmt::format("coda '{}' of clan '{}' lacks an id_flag annotation",
                                r.coda_id, clan));
      }
      (*r.id_flag ? id_sample : nonid_sample).records.push_back(r);
    }
    if (!id_sample.records.empty()) id_part.samples.push_back(std::move(id_sample));
    if (!nonid_sample.records.empty()) nonid_part.samples.push_back(std::move(nonid_sample));
  }
  return {std::move(id_part), std::move(nonid_part)};
}

OverlapMatrix load_overlap_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open overlap file '{}'", path.string()));

  std::string line;
  if (!std::getline(in, line)) throw Error("empty overlap file");
  if (line.ends_with('\r')) line.pop_back();
  auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "clan") {
    throw Error("overlap header must be 'clan,<labels...>'");
  }

  OverlapMatrix m;
  m.clans.assign(header.begin() + 1, header.end());
  const std::size_t n = m.clans.size();

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.ends_with('\r')) line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != n + 1) {
      throw Error(fmt::format("row {}: expected {} fields, got {}", row, n + 1, fields.size()));
    }
    const std::size_t i = m.values.size();
    if (i >= n) throw Error("overlap matrix has more rows than columns");
    if (fields[0] != m.clans[i]) {
      throw Error(fmt::format("row {}: label '{}' does not match column order '{}'",
                              row, fields[0], m.clans[i]));
    }
    std::vector<double> vals;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = parse_double(fields[j + 1], row, "overlap");
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(fmt::format("row {}: overlap {} outside [0,1]", row, v));
      }
      vals.push_back(v);
    }
    if (vals[i] != 1.0) {
      throw Error(fmt::format("row {}: diagonal entry must be 1, got {}", row, vals[i]));
    }
    m.values.push_back(std::move(vals));
  }
  if (m.values.size() != n) {
    throw Error(fmt::format("overlap matrix is not square: {} labels, {} rows",
                            n, m.values.size()));
  }
  return m;
}

}  // namespace subcoda
