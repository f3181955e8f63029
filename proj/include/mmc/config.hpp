#pragma once

// Scenario configuration files.
//
// INI-style text: `[section]` headers, `key = value` lines, `#` or `;`
// comments. Keys are addressed as `section.key`, e.g. `system.n` or
// `scenario.nsw_schedule`. Unset keys keep the value of the base profile.

#include "mmc/hvdc_sim.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mmc {

class ConfigError : public std::runtime_error {
public:
    enum class Kind { MissingFile, Syntax, Invalid };

    ConfigError(Kind kind, std::string key, const std::string& message);

    Kind kind() const { return kind_; }
    /// Dotted key the error refers to; empty for file-level errors.
    const std::string& key() const { return key_; }

private:
    Kind kind_;
    std::string key_;
};

ScenarioConfig parse_config(const std::filesystem::path& path,
                            const ScenarioConfig& base = paper_profile());
ScenarioConfig parse_config_text(std::string_view text, const ScenarioConfig& base = paper_profile());

/// Re-derives the schedule and checks every invariant, naming the offending key.
void validate_config(ScenarioConfig& config);

/// Serialises every key; parse_config_text(write_config(c)) reproduces c.
std::string write_config(const ScenarioConfig& config);

std::string to_string(Algorithm algorithm);
std::string to_string(DcModel model);
Algorithm parse_algorithm(std::string_view text);
DcModel parse_dc_model(std::string_view text);

} // namespace mmc
