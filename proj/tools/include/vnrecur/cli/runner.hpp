#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vnrecur/cli/scenario.hpp"

namespace vnrecur::cli {

inline constexpr double kDefaultTolerance = 1e-10;

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitInvariant = 3,
  kExitIo = 4,
};

// Precedence: command line, then params.tol, then VNRECUR_TOL, then the
// built-in default. A malformed VNRECUR_TOL is a ScenarioError.
double resolve_tolerance(std::optional<double> cli, std::optional<double> scenario,
                         const char* env_value);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k_max;
  double tolerance = kDefaultTolerance;
};

struct InvariantResult {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct RunOutput {
  std::string name;
  std::string summary;  // <name>.summary.txt
  std::string report;   // <name>.report.json
  std::string csv;      // <name>.csv
  std::vector<InvariantResult> invariants;
  bool ok = true;       // every invariant held and no numerical error occurred
  std::optional<std::string> error;
};

// Runs the scenario's experiment in memory. Library errors raised while
// running are captured in `error` (and make the run fail) so the partial
// report can still be written.
RunOutput run_scenario(const Scenario& scenario, const RunOptions& options);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes the three files into `dir` (created if missing); each file goes to
// a temporary name first and is renamed into place.
void write_outputs(const RunOutput& output, const std::filesystem::path& dir);
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// printf("%.17g"), with -0 normalized to 0.
std::string format_number(double x);

}  // namespace vnrecur::cli
