// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "raretype/partition.hpp"

namespace raretype {

struct ProfileRecord {
  std::string id;
  std::string key;  // locus values joined by the configured separator
};

// The 7 Y-STR loci used for the European reference data.
const std::vector<std::string>& default_loci();

struct RowFilter {
  std::string column;
  std::string value;
};

struct DatabaseOptions {
  std::vector<std::string> loci = default_loci();
  char separator = '|';
  // Column holding the individual's identifier; row number is used when absent.
  std::string id_column = "id";
  // Keep only rows whose `column` equals `value` (e.g. a location column).
  std::optional<RowFilter> filter;
};

struct Database {
  std::vector<ProfileRecord> records;
  SetPartition partition;
};

// Tab-separated: header row of column names, one row per individual. Row order is the
// element order of the resulting partition. Throws ParseError naming the offending line
// for a missing column, ragged row, or empty input.
Database parse_database(std::istream& in, const DatabaseOptions& options = {});
Database ingest_database(const std::filesystem::path& path, const DatabaseOptions& options = {});

// Comma-separated list, e.g. "DYS19,DYS389I".
std::vector<std::string> parse_locus_list(const std::string& text);

}  // namespace raretype
