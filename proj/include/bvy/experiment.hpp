#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "bvy/json_io.hpp"

namespace bvy {

enum class Scenario { VerifyBvyEuclidean, VerifyBounds, VerifyOptimality, VerifyAsymptotic, DiagnoseSpace, Golden1d };

std::string_view to_string(Scenario s);
Scenario scenario_from_string(std::string_view name);

struct ExperimentConfig {
  Scenario scenario = Scenario::Golden1d;
  json space;
  /// Absent for diagnose-space.
  json function;
  BVYConfig bvy;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  /// Scenario-specific tolerances and run lists.
  json checks = json::object();
  /// Budgets for diagnostics: n_points, radii, n_trials.
  json diagnostics = json::object();
};

/// Validates the document and the (scenario, space, function) capabilities.
/// Throws ConfigError or CapabilityError.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ScenarioResult {
  json report;
  bool pass = false;
  /// File name -> contents; every file is a pure function of the config.
  std::map<std::string, std::string> files;
};

/// Runs the scenario. Assertion failures give pass == false, not exceptions.
ScenarioResult run_scenario(const ExperimentConfig& cfg);

/// Writes result.files into cfg.output_dir (created when missing).
void write_outputs(const ExperimentConfig& cfg, const ScenarioResult& result);

/// Spaces, formulas and scenarios known to the runner.
json catalogue();

}  // namespace bvy
