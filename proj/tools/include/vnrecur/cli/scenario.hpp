#pragma once

// Scenario files: a JSON description of a system, a projection, a state and
// the experiment to run on them.
//
//   {
//     "schema_version": 1,
//     "name": "two-level",
//     "seed": 0,
//     "experiment": "continuous",
//     "system": { "kind": "quantum", "block_dims": [2], "hamiltonian": [...],
//                 "projection": {...} },
//     "params": { "t_step": 1.0471975511965976, "t_grid": {...} }
//   }
//
// Complex entries are [re, im] pairs (a bare number is read as real);
// matrices are row-major nested arrays; a block list holds one matrix per
// algebra block.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vnrecur/algebra.hpp"
#include "vnrecur/classical.hpp"
#include "vnrecur/dynamics.hpp"

namespace vnrecur::cli {

inline constexpr int kSchemaVersion = 1;

enum class Experiment {
  Liouville,
  Recurrence,
  Khintchine,
  Continuous,
  Moments,
  GnsVerify,
  Prop31,
  LudersDemo,
};

std::string_view to_string(Experiment e) noexcept;
std::optional<Experiment> parse_experiment(std::string_view name) noexcept;

struct TimeGrid {
  std::vector<double> points;
};

struct Params {
  std::size_t k_max = 50;
  std::optional<double> t_step;
  double epsilon = 0.1;
  double threshold = 1e-12;  // "> 0" cut-off for recurrence searches
  std::size_t n_max = 1'000'000;
  std::size_t samples = 100;
  std::size_t count = 5;
  std::optional<TimeGrid> t_grid;
  std::optional<double> tol;
};

struct QuantumSystemSpec {
  BlockAlgebra algebra;
  std::optional<AlgebraElement> hamiltonian;
  std::optional<Endomorphism> endomorphism;
  AlgebraElement projection;
  LinearFunctional state;
};

struct ClassicalSystemSpec {
  ClassicalSystem system;
  PointSet subset;
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  Experiment experiment = Experiment::Recurrence;
  std::optional<QuantumSystemSpec> quantum;
  std::optional<ClassicalSystemSpec> classical;
  Params params;
};

// Malformed JSON, schema violations and inconsistent systems all surface as
// ScenarioError; the message names the offending field or invariant.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

struct BundledScenario {
  std::string_view name;
  std::string_view text;
};

// Scenarios compiled into the binary, in listing order.
const std::vector<BundledScenario>& bundled_scenarios();
std::optional<std::string_view> find_bundled(std::string_view name);

}  // namespace vnrecur::cli
