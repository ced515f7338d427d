// Scenario runner: run, validate, list-scenarios.
#include "pmcm/errors.hpp"
#include "pmcm/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int cmd_run(const std::string& target, const std::string& out_dir, const pmcm::RunOverrides& ov, bool quiet) {
  const nlohmann::json j = pmcm::read_scenario_file(pmcm::resolve_scenario(target));
  const pmcm::RunOutcome out = pmcm::run_scenario_json(j, ov);
  const std::string name = j.value("name", "scenario");
  const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("out") / name : std::filesystem::path(out_dir);
  pmcm::write_outcome(out, dir);
  if (out.report.contains("error")) std::cerr << "configuration error: " << out.report["error"].get<std::string>() << "\n";
  if (out.report.contains("failure")) std::cerr << "task failure: " << out.report["failure"].get<std::string>() << "\n";
  if (!quiet && out.report.contains("assertions"))
    for (const auto& a : out.report["assertions"])
      std::cout << (a["pass"].get<bool>() ? "  ok   " : "  FAIL ") << a["path"].get<std::string>() << " = "
                << a["actual"].dump() << " (expected " << a["expected"].dump() << ")\n";
  std::cout << name << ": " << (out.exit_code == 0 ? "PASS" : "FAIL") << " -> " << (dir / "report.json").string() << "\n";
  return out.exit_code;
}

int cmd_validate(const std::string& target) {
  const nlohmann::json j = pmcm::read_scenario_file(pmcm::resolve_scenario(target));
  const auto diags = pmcm::validate_scenario(j);
  bool errors = false;
  for (const auto& d : diags) {
    std::cout << d.level << ": " << (d.field.empty() ? "" : d.field + ": ") << d.message << "\n";
    errors = errors || d.level == "error";
  }
  if (diags.empty()) std::cout << "clean\n";
  return errors ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial prescribed mean curvature measures: scenario runner"};
  app.set_version_flag("--version", PMCM_VERSION);
  app.require_subcommand(1);

  std::string target, out_dir;
  double tol = 0.0, grid = 0.0;
  long long seed = 0;
  int jobs = 1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run a scenario file or bundled scenario");
  run->add_option("scenario", target, "Scenario path or bundled name")->required();
  run->add_option("--out", out_dir, "Output directory (default out/<name>)");
  auto* o_tol = run->add_option("--tol", tol, "Override the scenario tolerance");
  auto* o_grid = run->add_option("--grid", grid, "Override the grid step")->check(CLI::PositiveNumber);
  auto* o_seed = run->add_option("--seed", seed, "Seed recorded in the report");
  auto* o_jobs = run->add_option("--jobs", jobs, "Parallel sub-runs")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", quiet, "Only print the verdict line");

  auto* val = app.add_subcommand("validate", "Check a scenario without running solvers");
  val->add_option("scenario", target, "Scenario path or bundled name")->required();

  auto* list = app.add_subcommand("list-scenarios", "List bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      pmcm::RunOverrides ov;
      if (*o_tol) ov.tol = tol;
      if (*o_grid) ov.grid = grid;
      if (*o_seed) ov.seed = seed;
      if (*o_jobs) ov.jobs = jobs;
      return cmd_run(target, out_dir, ov, quiet);
    }
    if (*val) return cmd_validate(target);
    if (*list) {
      for (const auto& [name, desc] : pmcm::list_bundled_scenarios()) std::cout << name << "\t" << desc << "\n";
      return 0;
    }
  } catch (const pmcm::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
