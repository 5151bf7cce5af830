#pragma once

#include <map>
#include <string>
#include <vector>

#include "msfct/core.hpp"
#include "msfct/pipeline.hpp"

namespace msfct {

// Minimal strict TOML-style config: [section] headers, key = value lines,
// strings, numbers, booleans, single-line scalar arrays, and # comments.
// Duplicate keys are errors; every key must be consumed by the loader
// (unknown keys are fatal) so typos cannot silently change an experiment.
struct ConfigValue {
  enum class Kind { String, Number, Bool, Array };
  Kind kind{Kind::String};
  std::string str;    // String: text; Number: raw token
  bool boolean{false};
  std::vector<ConfigValue> array;
  int line{0};
};

using ConfigTable = std::map<std::string, ConfigValue>;  // "section.key" -> value

ConfigTable parse_config_text(const std::string& text);

// Parses and validates an experiment description.  Throws ConfigError naming
// the offending "section.key" for unknown keys, type mismatches, and value
// range violations; IoError if the file cannot be read.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig experiment_config_from_text(const std::string& text);

}  // namespace msfct
