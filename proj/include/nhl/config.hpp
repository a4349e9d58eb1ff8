#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nhl/harness.hpp"

namespace nhl {

/// Malformed configuration text, or an unreadable file.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Parses the TOML subset used by experiment files: tables, dotted keys, basic and literal
/// strings, integers, floats, booleans, (multi-line) arrays and inline tables.
nlohmann::json parse_toml(const std::string& text);

/// Applies `dotted.key=value` overrides (values in TOML syntax; bare words become strings).
void apply_overrides(nlohmann::json& doc, const std::vector<std::string>& overrides);

/// Builds a validated configuration from a parsed document. Unknown keys and out-of-range
/// values raise ConfigError naming the key; wrong value types raise ConfigError as well.
/// With `validate` unset only key names and value types are checked.
ExperimentConfig config_from_json(const nlohmann::json& doc, bool validate = true);

/// Reads, overrides and validates. Throws ParseError (unreadable/malformed) or ConfigError.
ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {});
ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {});

/// Complete document with every key, and its TOML rendering; parsing either reproduces cfg.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string config_to_toml(const ExperimentConfig& cfg);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace nhl
