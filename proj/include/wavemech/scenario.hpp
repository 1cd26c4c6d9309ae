#pragma once

#include "wavemech/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wavemech {

/// One verification outcome as written to report.json.
struct CheckResult {
  std::string check_name;
  bool pass = false;
  nlohmann::json details = nlohmann::json::object();
  nlohmann::json tolerances = nlohmann::json::object();
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  /// false: run the pipeline and write data files, skip the report.
  bool verify = true;
};

struct ScenarioResult {
  std::string scenario;
  std::filesystem::path out_dir;
  std::vector<CheckResult> checks;

  bool all_pass() const;
  nlohmann::json report_json() const;
};

const std::vector<std::string>& scenario_names();

/// Runs the scenario named by `scenario.name`. Unknown or unused keys,
/// malformed values and invalid physics (|v| >= 1 boosts, CFL violations)
/// raise configuration or superluminal errors before any output is written.
/// A divergent evolution writes last_good.bin to the output directory and
/// rethrows the `diverged` error.
ScenarioResult run_scenario(Config cfg, const RunOptions& opts);

}  // namespace wavemech
