#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bwlan/params.hpp"

namespace bwlan {

/// Ordered key/value pairs from a config document.
/// Format: one `key = value` per line, `#` starts a comment, blank lines ignored.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Throws ConfigError with the offending line number on malformed input or
/// duplicate keys.
KeyValues parse_key_values(std::istream& in);
KeyValues parse_key_values_text(const std::string& text);
KeyValues read_key_values_file(const std::string& path);

/// Field names of ScenarioParams as they appear in config files.
const std::vector<std::string>& scenario_keys();

/// Returns true when `key` named a scenario field and was applied.
/// A bad value throws ConfigError.
bool apply_scenario_key(ScenarioParams& params, const std::string& key, const std::string& value);

/// Every key must be a scenario field. Result is validated.
ScenarioParams scenario_from(const KeyValues& kv);

/// Canonical text form, one line per field, round-trips through scenario_from.
std::string to_config_text(const ScenarioParams& params);

/// Strict numeric parsing shared by config and CLI code.
double parse_double(const std::string& key, const std::string& value);
int parse_int(const std::string& key, const std::string& value);
std::vector<std::string> split_list(const std::string& value);

}  // namespace bwlan
