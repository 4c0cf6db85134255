#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plgrad/harness.hpp"

namespace plgrad {

/// Sectioned key = value text. Lines starting with '#' or ';' are comments.
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  /// Overlays every key of `other` onto this file. A different problem
  /// kind replaces the whole [problem] section.
  void merge(const ConfigFile& other);
};

/// Throws std::runtime_error naming the offending line.
ConfigFile parse_config(std::string_view text);
ConfigFile load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Built-in configuration for a named preset.
ConfigFile preset_config(std::string_view name);

struct ValidateSettings {
  std::vector<std::string> checks;  // subset of all_checks()
  int pl_samples = 200;
  int gradient_points = 100;
  int prox_instances = 100;
};

/// pl, prox, gradient, recursion, coverage, expectation, feasibility.
const std::vector<std::string>& all_checks();

struct RunSpec {
  std::string problem_kind;
  ExperimentConfig experiment;
  ValidateSettings validate;
};

/// Builds the problem and experiment described by a config. Unknown
/// sections or keys, malformed values and out-of-range settings throw
/// std::invalid_argument.
RunSpec build_run_spec(const ConfigFile& config);

/// Reads a trace CSV with header t, w_1, ..., w_m, p_ref and consecutive
/// rows t = 0, 1, ...
DemandResponseTraces load_demand_response_traces(const std::filesystem::path& path);

/// Parses a comma-separated list of doubles.
std::vector<double> parse_double_list(std::string_view text);

}  // namespace plgrad
