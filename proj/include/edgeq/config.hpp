#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "edgeq/harness.hpp"

namespace edgeq {

// Applies a nested key-value config document onto a spec. Unknown keys are
// rejected with the offending key path named (ConfigError).
void apply_config_json(const nlohmann::json& doc, ExperimentSpec& spec);

// Reads and applies a JSON config file. IoError on unreadable files,
// ConfigError on malformed content.
void load_config_file(const std::filesystem::path& path, ExperimentSpec& spec);

// Canonical echo of the effective configuration, covering every accepted
// key.
nlohmann::ordered_json effective_config(const ExperimentSpec& spec);

std::string_view disruption_rule_name(DisruptionRule rule);
DisruptionRule disruption_rule_from_name(std::string_view name);  // throws ConfigError
std::string_view volatility_model_name(VolatilityModel model);
VolatilityModel volatility_model_from_name(std::string_view name);  // throws ConfigError

}  // namespace edgeq
