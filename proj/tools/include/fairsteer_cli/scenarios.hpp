#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fairsteer/distribution.hpp"
#include "fairsteer/steer_univariate.hpp"

namespace fairsteer::cli {

struct SimulationScenario {
  std::string name;
  FairDistribution dist;
  double threshold = 0.5;
  std::vector<Method> methods;
};

[[nodiscard]] std::vector<std::string> builtin_scenario_names();
[[nodiscard]] SimulationScenario builtin_scenario(std::string_view name);

// {"name": ..., "threshold": t, "methods": [...], "distribution": {spec}}
[[nodiscard]] SimulationScenario parse_scenario(std::string_view text);
[[nodiscard]] std::string serialize_scenario(const SimulationScenario& s);

[[nodiscard]] InterventionResult run_method(Method method, const FairDistribution& dist, double threshold,
                                            const LineSearch& search = {});

struct SimulationOutput {
  std::vector<InterventionResult> results;
  std::vector<std::filesystem::path> files;
};

/// Steers with every method of the scenario and writes, per method, a curves
/// CSV and an SVG, plus one metrics CSV for the scenario.
[[nodiscard]] SimulationOutput run_scenario(const SimulationScenario& s, const std::filesystem::path& out_dir,
                                            const LineSearch& search = {});

[[nodiscard]] std::string metrics_csv_header();
[[nodiscard]] std::string metrics_csv_row(const SimulationScenario& s, const InterventionResult& r);

}  // namespace fairsteer::cli
