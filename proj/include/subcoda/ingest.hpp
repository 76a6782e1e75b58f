#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subcoda/types.hpp"

namespace subcoda {

/// One annotated coda: its inter-click intervals plus metadata.
/// Optional fields are absent when the source data does not annotate them;
/// operations that need an absent field fail at call time.
struct CodaRecord {
  std::string coda_id;
  std::string sample_id;
  std::optional<std::string> unit_id;
  std::optional<std::string> clan;
  std::optional<std::string> coda_type;
  std::optional<bool> id_flag;  // true = identity coda for the record's clan
  std::vector<double> icis;    // seconds, each finite and > 0
};

/// Codas recorded together during one event.
struct CodaSample {
  std::string sample_id;
  std::optional<std::string> clan;  // set when all annotated records agree
  std::vector<CodaRecord> records;
};

struct Dataset {
  std::vector<CodaSample> samples;
  std::string source;     // provenance: path the data was loaded from
  std::string loaded_at;  // provenance: ISO-8601 load time

  std::size_t coda_count() const;
  std::vector<std::string> clan_labels() const;  // distinct, in first-seen order
};

/// Pairwise clan spatial overlap fractions. Asymmetric by nature: the
/// matrix row gives the fraction of the row clan's samples recorded near
/// the column clan. Diagonal is 1.
struct OverlapMatrix {
  std::vector<std::string> clans;
  std::vector<std::vector<double>> values;

  double at(const std::string& row_clan, const std::string& col_clan) const;
  std::size_t index_of(const std::string& clan) const;
};

/// Loads a coda CSV (header: coda_id,sample_id,unit_id,clan,coda_type,
/// id_flag,icis; icis packed as ';'-joined decimal seconds). Rows are
/// grouped into samples by sample_id in order of first appearance.
/// Throws Error with the offending row number on any malformed row.
Dataset load_dataset(const std::filesystem::path& path);

/// Writes the dataset back in the same CSV schema. Doubles are written in
/// shortest round-trip form, so load -> write -> load is idempotent.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Keeps exactly the samples holding at least min_codas codas.
Dataset filter_min_codas(const Dataset& dataset, std::size_t min_codas);

/// Splits the records of one clan into (identity, non-identity) datasets by
/// id_flag. Sample structure is preserved; emptied samples are dropped.
/// Throws if any record of the clan lacks an id_flag annotation.
std::pair<Dataset, Dataset> partition_id_nonid(const Dataset& dataset,
                                               const std::string& clan);

/// Restriction of the dataset to records of one clan (sample structure kept).
Dataset restrict_to_clan(const Dataset& dataset, const std::string& clan);

/// Loads an overlap CSV (first row `clan,<labels...>`, then one row of
/// fractions per clan). Validates squareness, [0,1] entries and unit diagonal.
OverlapMatrix load_overlap_matrix(const std::filesystem::path& path);

}  // namespace subcoda
