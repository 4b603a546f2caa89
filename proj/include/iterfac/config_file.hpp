#pragma once

#include <stdexcept>
#include <string>

#include "iterfac/montecarlo.hpp"

namespace iterfac {

// Config-file problem with a 1-based line number (0 when not line-specific).
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& what, int line) : std::runtime_error(what), line(line) {}
  int line;
};

// Sectioned key=value experiment description ([problem], [priors], [rules],
// [sweep], [output]); unknown sections/keys and duplicates are rejected with
// line-numbered messages. master_seed has no default and must be present.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin = "config");
ExperimentConfig parse_config_file(const std::string& path);

// Canonical serialization; parsing it back yields a semantically identical config.
std::string serialize_config(const ExperimentConfig& config);

bool config_equal(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace iterfac
