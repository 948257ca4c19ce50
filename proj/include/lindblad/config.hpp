// config.hpp — Scenario configuration files: a flat INI-style format with
// sections [potential], [dynamics], [initial], [sweep], [output]. Unknown
// keys are errors; every documented precondition is checked at parse time.

#pragma once

#include <string>

#include "lindblad/experiment.hpp"

namespace lindblad {

// Parse and fully validate a config file. Throws ParseError (with line and
// column) on malformed text or unknown keys, ValidationError on violated
// preconditions.
ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

// Re-check the preconditions of an assembled config (used by parse_config and
// by callers that build configs programmatically). Throws ValidationError.
void validate_config(const ScenarioConfig& cfg);

// Canonical echo with every default materialized; re-parses to an identical
// ScenarioConfig.
std::string effective_config(const ScenarioConfig& cfg);

}  // namespace lindblad
