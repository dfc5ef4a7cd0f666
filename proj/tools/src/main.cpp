#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vnrecur/cli/runner.hpp"
#include "vnrecur/cli/scenario.hpp"

namespace {

using namespace vnrecur::cli;

// A path that does not exist may name a bundled scenario instead.
Scenario load(const std::string& source) {
  if (!std::filesystem::exists(source)) {
    if (const auto text = find_bundled(source)) return parse_scenario(*text);
  }
  return load_scenario(source);
}

int run_command(const std::string& source, const std::string& out_dir, std::optional<std::uint64_t> seed,
                std::optional<std::size_t> k_max, std::optional<double> tol) {
  Scenario scenario;
  RunOptions options;
  try {
    scenario = load(source);
    options.seed = seed;
    options.k_max = k_max;
    if (k_max && *k_max == 0) throw ScenarioError("--kmax must be positive");
    if (tol && !(*tol > 0.0)) throw ScenarioError("--tol must be positive");
    options.tolerance = resolve_tolerance(tol, scenario.params.tol, std::getenv("VNRECUR_TOL"));
  } catch (const ScenarioError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  }

  const RunOutput output = run_scenario(scenario, options);
  try {
    write_outputs(output, out_dir);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  }
  std::cout << output.summary;
  if (!output.ok) {
    for (const InvariantResult& inv : output.invariants) {
      if (!inv.ok) std::cerr << "invariant failed: " << inv.name << ": " << inv.detail << '\n';
    }
    if (output.error) std::cerr << "error: " << *output.error << '\n';
    return kExitInvariant;
  }
  return kExitOk;
}

int validate_command(const std::string& source) {
  try {
    const Scenario scenario = load(source);
    std::cout << scenario.name << ": ok\n";
    return kExitOk;
  } catch (const ScenarioError& e) {
    std::cout << "validation error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrence experiments on finite von Neumann algebras"};
  app.require_subcommand(1);

  std::string source;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k_max;
  std::optional<double> tol;

  CLI::App* run = app.add_subcommand("run", "Run a scenario and write summary, report and CSV");
  run->add_option("scenario", source, "Scenario JSON file or bundled scenario name")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--kmax", k_max, "Override params.k_max");
  run->add_option("--tol", tol, "Invariant tolerance (default: VNRECUR_TOL or 1e-10)");

  CLI::App* validate = app.add_subcommand("validate", "Check a scenario without running it");
  validate->add_option("scenario", source, "Scenario JSON file or bundled scenario name")->required();

  app.add_subcommand("list", "List bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (run->parsed()) return run_command(source, out_dir, seed, k_max, tol);
  if (validate->parsed()) return validate_command(source);
  for (const BundledScenario& b : bundled_scenarios()) std::cout << b.name << '\n';
  return kExitOk;
}
