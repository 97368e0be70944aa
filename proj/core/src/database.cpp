// Apache License, Version 2.0, refer to LICENSE.txt

#include "raretype/database.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

namespace raretype {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) fields.push_back(field);
  if (!line.empty() && line.back() == delim) fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(1, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

const std::vector<std::string>& default_loci() {
  static const std::vector<std::string> loci{"DYS19",  "DYS389I", "DYS389II", "DYS390",
                                             "DYS391", "DYS392",  "DYS393"};
  return loci;
}

std::vector<std::string> parse_locus_list(const std::string& text) {
  std::vector<std::string> loci;
  for (auto& item : split(text, ',')) {
    auto name = trim(item);
    if (name.empty()) throw DomainError("empty locus name in '" + text + "'");
    loci.push_back(std::move(name));
  }
  if (loci.empty()) throw DomainError("no loci given");
  return loci;
}

Database parse_database(std::istream& in, const DatabaseOptions& options) {
  if (options.loci.empty()) throw DomainError("no loci selected");
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  if (line.empty()) throw ParseError(0, "empty file");
  header = split(line, '\t');
  for (auto& h : header) h = trim(h);

  std::vector<std::size_t> locus_cols;
  for (const auto& locus : options.loci) {
    try {
      locus_cols.push_back(column_index(header, locus));
    } catch (const ParseError&) {
      throw ParseError(line_no, "missing column '" + locus + "'");
    }
  }
  std::optional<std::size_t> id_col;
  if (auto it = std::find(header.begin(), header.end(), options.id_column); it != header.end())
    id_col = static_cast<std::size_t>(it - header.begin());
  std::optional<std::size_t> filter_col;
  if (options.filter) {
    try {
      filter_col = column_index(header, options.filter->column);
    } catch (const ParseError&) {
      throw ParseError(line_no, "missing column '" + options.filter->column + "'");
    }
  }

  std::vector<ProfileRecord> records;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    ++row_no;
    if (filter_col && trim(fields[*filter_col]) != options.filter->value) continue;
    ProfileRecord rec;
    rec.id = id_col ? trim(fields[*id_col]) : std::to_string(row_no);
    for (std::size_t k = 0; k < locus_cols.size(); ++k) {
      auto cell = trim(fields[locus_cols[k]]);
      if (cell.find(options.separator) != std::string::npos)
        throw ParseError(line_no, "value '" + cell + "' contains the key separator");
      if (k > 0) rec.key += options.separator;
      rec.key += cell;
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw ParseError(line_no, "no data rows");

  std::vector<std::string> keys;
  keys.reserve(records.size());
  for (const auto& r : records) keys.push_back(r.key);
  auto partition = partition_from_labels(keys);
  return Database{std::move(records), std::move(partition)};
}

Database ingest_database(const std::filesystem::path& path, const DatabaseOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
  return parse_database(in, options);
}

}  // namespace raretype
