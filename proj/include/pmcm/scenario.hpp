#pragma once

#include "pmcm/measures.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pmcm {

inline constexpr int kScenarioSchemaVersion = 1;

struct Scenario {
  std::string name;
  std::string description;
  std::string task;  // radial | minimize | verify | gamma | family | maxprinciple | checks
  RadialMeasure measure;
  double phi_a = 0.0;
  double phi_b = 0.0;
  nlohmann::json params;  // defaults filled in
  nlohmann::json expect;
  nlohmann::json resolved;  // full configuration as run
};

struct Diagnostic {
  std::string level;  // error | warning
  std::string field;
  std::string message;
};

struct RunOverrides {
  std::optional<double> tol;
  std::optional<double> grid;
  std::optional<long long> seed;
  std::optional<int> jobs;
};

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 1 assertion or task failure, 2 configuration error
  nlohmann::json report;
  std::map<std::string, std::string> files;  // file name -> contents (CSV)
};

// Parses text with line diagnostics; throws ConfigError.
nlohmann::json read_scenario_text(const std::string& text);
nlohmann::json read_scenario_file(const std::filesystem::path& path);

// Throws ConfigError naming the offending field.
Scenario parse_scenario(const nlohmann::json& j, const RunOverrides& ov = {});

// Schema and semantic checks without running any solver.
std::vector<Diagnostic> validate_scenario(const nlohmann::json& j);

RunOutcome run_scenario(const Scenario& s);
RunOutcome run_scenario_json(const nlohmann::json& j, const RunOverrides& ov = {});
void write_outcome(const RunOutcome& out, const std::filesystem::path& dir);

std::filesystem::path bundled_scenario_dir();
// Resolves a bundled scenario name or a path.
std::filesystem::path resolve_scenario(const std::string& name_or_path);
std::vector<std::pair<std::string, std::string>> list_bundled_scenarios();  // name, description

}  // namespace pmcm
