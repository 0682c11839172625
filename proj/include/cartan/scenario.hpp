#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "cartan/report.hpp"

namespace cartan::scenario {

using nlohmann::json;

/// One expected-vs-measured pair with its tolerance.
struct CheckResult {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string mode = "abs";  // "abs": |measured-expected| <= tol; "lt": measured < tol; "eq": exact
  bool pass = false;
};

struct RunReport {
  std::string scenario;
  json config_echo;
  std::vector<CheckResult> checks;
  double wall_seconds = 0.0;
  std::vector<std::string> artifacts;

  bool all_pass() const;
  json to_json() const;
};

struct RunOptions {
  std::string out_dir;  // empty: no artifacts written
  int threads = 1;
  std::optional<std::uint64_t> seed_override;
};

/// Validates the config against the scenario schema (unknown keys rejected,
/// seed mandatory for sampling scenarios) and dispatches to a builtin.
/// Throws ConfigError for schema violations.
RunReport run_scenario(const json& config, const RunOptions& opts = {});

struct ScenarioInfo {
  std::string name;
  std::string description;
};

/// Stable, alphabetized catalog of the builtin scenarios.
std::vector<ScenarioInfo> list_scenarios();

/// Stabilizer verification from a {algebra, datum} descriptor.
RunReport verify_stabilizer(const json& descriptor, const RunOptions& opts = {});

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };
LogLevel log_level();
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace cartan::scenario
