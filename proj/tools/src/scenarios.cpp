#include "fairsteer_cli/scenarios.hpp"

#include <array>
#include <sstream>

#include <json.hpp>

#include "fairsteer/error.hpp"
#include "fairsteer/spec_io.hpp"
#include "fairsteer/steer_multivariate.hpp"
#include "fairsteer_cli/plot.hpp"

namespace fairsteer::cli {

using nlohmann::json;

namespace {

struct Builtin {
  const char* name;
  std::array<double, 4> means;  // 00, 10, 01, 11
  std::array<double, 4> stds;
  std::array<double, 4> q;
  double threshold;
};

// Group 0's class spread is wide in high-dp, so a single group-1 threshold
// shifts positive rates strongly; already-fair has group 0 = 2 x group 1.
constexpr Builtin kBuiltins[] = {
    {"high-dp", {0.0, 2.0, 0.0, 2.0}, {3.0, 3.0, 0.6, 0.6}, {0.375, 0.125, 0.375, 0.125}, 0.5},
    {"shifted", {-0.5, 1.0, -1.5, 1.5}, {1.0, 1.0, 1.0, 1.0}, {0.25, 0.25, 0.25, 0.25}, 0.5},
    {"already-fair", {-2.0, 2.0, -1.0, 1.0}, {2.0, 2.0, 1.0, 1.0}, {0.25, 0.25, 0.25, 0.25}, 0.5},
    {"cost-3-4", {0.0, 1.5, 0.0, 3.0}, {1.0, 1.0, 1.0, 1.0}, {0.25, 0.25, 0.25, 0.25}, 0.75},
    {"high-eo", {0.0, 1.0, 0.0, 3.0}, {1.0, 1.0, 1.0, 1.0}, {0.25, 0.25, 0.25, 0.25}, 0.5},
};

const std::vector<Method> kDefaultMethods = {Method::Affirmative, Method::AllSubgroups, Method::MeanMatching};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> names;
  for (const auto& b : kBuiltins) names.emplace_back(b.name);
  return names;
}

SimulationScenario builtin_scenario(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (name == b.name) {
      return {b.name, FairDistribution::binary_univariate(b.means, b.stds, b.q), b.threshold, kDefaultMethods};
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown builtin scenario '" + std::string(name) + "'");
}

SimulationScenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!j.is_object() || !j.contains("distribution")) throw Error(ErrorCode::ParseError, "scenario needs a 'distribution'");
  SimulationScenario s{j.value("name", std::string("scenario")), parse_distribution(j["distribution"].dump()),
                       0.5, kDefaultMethods};
  if (j.contains("threshold")) {
    if (!j["threshold"].is_number()) throw Error(ErrorCode::ParseError, "threshold must be a number");
    s.threshold = j["threshold"].get<double>();
  }
  if (!(s.threshold > 0.0 && s.threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0,1)");
  if (j.contains("methods")) {
    s.methods.clear();
    for (const auto& m : j["methods"]) {
      const auto parsed = m.is_string() ? parse_method(m.get<std::string>()) : std::nullopt;
      if (!parsed) throw Error(ErrorCode::ParseError, "unknown method in scenario: " + m.dump());
      s.methods.push_back(*parsed);
    }
  }
  return s;
}

std::string serialize_scenario(const SimulationScenario& s) {
  json j;
  j["name"] = s.name;
  j["threshold"] = s.threshold;
  j["methods"] = json::array();
  for (auto m : s.methods) j["methods"].push_back(std::string(method_name(m)));
  j["distribution"] = json::parse(serialize_distribution(s.dist));
  return j.dump(2) + "\n";
}

InterventionResult run_method(Method method, const FairDistribution& dist, double threshold, const LineSearch& search) {
  switch (method) {
    case Method::Affirmative: return affirmative_univariate(dist, threshold);
    case Method::AllSubgroups: return all_subgroups_univariate(dist, search, threshold);
    case Method::MeanMatching: return mean_matching(dist, threshold);
    case Method::Multivariate: return affirmative_multivariate(dist, {}, threshold);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

std::string metrics_csv_header() { return "scenario,threshold," + diagnostics_csv_header(); }

std::string metrics_csv_row(const SimulationScenario& s, const InterventionResult& r) {
  return s.name + "," + fmt(s.threshold) + "," + diagnostics_csv_row(r);
}

SimulationOutput run_scenario(const SimulationScenario& s, const std::filesystem::path& out_dir,
                              const LineSearch& search) {
  std::filesystem::create_directories(out_dir);
  SimulationOutput out;
  std::string metrics = metrics_csv_header() + "\n";
  for (Method m : s.methods) {
    auto r = run_method(m, s.dist, s.threshold, search);
    const std::string stem = s.name + "_" + std::string(method_name(m));
    const std::string csv = curves_csv(density_curves(r));
    const auto csv_path = out_dir / (stem + "_curves.csv");
    const auto svg_path = out_dir / (stem + ".svg");
    write_file_atomic(csv_path, csv);
    write_file_atomic(svg_path, render_svg(csv, r, s.threshold, s.name + " / " + std::string(method_name(m))));
    out.files.push_back(csv_path);
    out.files.push_back(svg_path);
    metrics += metrics_csv_row(s, r) + "\n";
    out.results.push_back(std::move(r));
  }
  const auto metrics_path = out_dir / (s.name + "_metrics.csv");
  write_file_atomic(metrics_path, metrics);
  out.files.push_back(metrics_path);
  return out;
}

}  // namespace fairsteer::cli
