// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "raretype/inference.hpp"
#include "raretype/oracle.hpp"
#include "raretype/partition.hpp"
#include "raretype/pyp.hpp"

namespace raretype {

// {"n": n, "blocks": [[...], ...]}
nlohmann::json to_json(const SetPartition& p);
SetPartition set_partition_from_json(const nlohmann::json& j);

// {"a": [...], "r": [...]}
nlohmann::json to_json(const IntegerPartition& p);
IntegerPartition integer_partition_from_json(const nlohmann::json& j);

// Inline "a:r,a:r" (e.g. "1:4,2:2,3:1").
IntegerPartition parse_integer_partition(const std::string& text);

nlohmann::json to_json(const MleResult& m);
nlohmann::json to_json(const LrReport& r);
nlohmann::json to_json(const WeightVector& w, bool include_weights = false);

// Shortest round-trip decimal text; "nan"/"inf" spelled out.
std::string format_number(double v);

// FNV-1a 64-bit digest of the compact serialization, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

// Pretty-printed with a trailing newline; NaN becomes null.
void write_json(std::ostream& out, const nlohmann::json& j);

}  // namespace raretype
