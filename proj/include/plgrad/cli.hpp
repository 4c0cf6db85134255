#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plgrad/config.hpp"
#include "plgrad/harness.hpp"

namespace plgrad {

/// Flags shared by the run and validate commands. A preset is loaded
/// first, a config file is overlaid on it, and the remaining flags
/// override both.
struct CliOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::string> preset;
  std::filesystem::path out = "out";
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> deltas;
};

RunSpec resolve_spec(const CliOptions& options);

/// Column label for a delta, e.g. 0.05 -> "0.05".
std::string delta_label(double delta);

std::string regret_csv(const AggregateReport& report);
std::string bounds_csv(const AggregateReport& report);
std::string summary_text(const RunSpec& spec, const AggregateReport& report);

/// The invariant battery selected by spec.validate.checks.
ValidationSummary run_validation(const RunSpec& spec);

/// Exit codes: 0 success, 1 a check failed, 2 bad input.
int cmd_run(const CliOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const CliOptions& options, std::ostream& out, std::ostream& err);

struct BoundsParams {
  double theta = 0.5;
  double k = 1.0;
  std::vector<double> deltas{0.05};
  std::optional<double> mu;
  std::optional<double> smoothness;
  std::optional<double> diameter;
  double r0 = 0.0;
  double e_bar = 0.0;    // E||e||^2, taken constant in t
  double psi_bar = 0.0;  // psi_t, taken constant in t
  long horizon = 0;      // > 0 also prints bound series
};

int cmd_bounds(const BoundsParams& params, std::ostream& out, std::ostream& err);

}  // namespace plgrad
