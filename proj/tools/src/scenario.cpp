#include "vnrecur/cli/scenario.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vnrecur/errors.hpp"

namespace vnrecur::cli {

namespace {

using nlohmann::json;

constexpr std::array<std::pair<Experiment, std::string_view>, 8> kExperiments{{
    {Experiment::Liouville, "liouville"},
    {Experiment::Recurrence, "recurrence"},
    {Experiment::Khintchine, "khintchine"},
    {Experiment::Continuous, "continuous"},
    {Experiment::Moments, "moments"},
    {Experiment::GnsVerify, "gns-verify"},
    {Experiment::Prop31, "prop31"},
    {Experiment::LudersDemo, "luders-demo"},
}};

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioError(where + ": " + what);
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(6);
  out << x;
  return out.str();
}

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (auto k : known) found = found || key == k;
    if (!found) fail(where, "unknown field \"" + key + "\"");
  }
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "number is not finite");
  return x;
}

std::size_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(where, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

Complex as_complex(const json& v, const std::string& where) {
  if (v.is_number()) return as_number(v, where);
  if (!v.is_array() || v.size() != 2) fail(where, "expected a complex number [re, im]");
  return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]")};
}

ComplexMatrix as_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of rows");
  const std::size_t rows = v.size();
  if (!v[0].is_array() || v[0].empty()) fail(where + "[0]", "expected a non-empty row");
  const std::size_t cols = v[0].size();
  ComplexMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) {
      fail(row_where, "expected " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = as_complex(v[r][c], row_where + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

AlgebraElement as_element(const BlockAlgebra& alg, const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != alg.block_count()) {
    fail(where, "expected " + std::to_string(alg.block_count()) + " blocks");
  }
  std::vector<ComplexMatrix> blocks;
  for (std::size_t k = 0; k < alg.block_count(); ++k) {
    const std::string block_where = where + "[" + std::to_string(k) + "]";
    ComplexMatrix m = as_matrix(v[k], block_where);
    const std::size_t n = alg.dim(k);
    if (m.rows() != n || m.cols() != n) {
      fail(block_where, "block must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    blocks.push_back(std::move(m));
  }
  return AlgebraElement(std::move(blocks));
}

std::vector<double> as_numbers(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::size_t> as_indices(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of indices");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_count(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

BlockAlgebra parse_algebra(const json& sys) {
  const json& dims_json = require(sys, "block_dims", "system");
  const std::vector<std::size_t> dims = as_indices(dims_json, "system.block_dims");
  if (dims.empty()) fail("system.block_dims", "needs at least one block");
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (dims[k] == 0) fail("system.block_dims[" + std::to_string(k) + "]", "must be positive");
  }
  if (!sys.contains("block_weights")) return BlockAlgebra(dims);
  const std::vector<double> weights = as_numbers(sys["block_weights"], "system.block_weights");
  if (weights.size() != dims.size()) {
    fail("system.block_weights", "expected " + std::to_string(dims.size()) + " weights");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0)) {
      fail("system.block_weights[" + std::to_string(k) + "]", "weights must be positive");
    }
    sum += weights[k];
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    fail("system.block_weights", "block weights must sum to 1 (sum = " + fmt(sum) + ")");
  }
  return BlockAlgebra(dims, weights);
}

AlgebraElement parse_projection(const BlockAlgebra& alg, const json& spec) {
  const std::string where = "system.projection";
  if (!spec.is_object()) fail(where, "expected an object");
  AlgebraElement p;
  if (spec.contains("blocks")) {
    reject_unknown(spec, {"blocks"}, where);
    p = as_element(alg, spec["blocks"], where + ".blocks");
  } else {
    reject_unknown(spec, {"observable", "interval"}, where);
    const AlgebraElement a = as_element(alg, require(spec, "observable", where), where + ".observable");
    const std::vector<double> s = as_numbers(require(spec, "interval", where), where + ".interval");
    if (s.size() != 2 || s[0] > s[1]) fail(where + ".interval", "expected [lo, hi] with lo <= hi");
    std::vector<ComplexMatrix> blocks;
    for (std::size_t k = 0; k < alg.block_count(); ++k) {
      const double defect = hermiticity_defect(a.block(k));
      if (defect > 1e-10) {
        fail(where + ".observable", "block " + std::to_string(k) + " is not Hermitian (||A - A*|| = " +
                                        fmt(defect) + ")");
      }
      blocks.push_back(spectral_projection(a.block(k), {s[0], s[1]}));
    }
    p = AlgebraElement(std::move(blocks));
  }
  if (!is_projection(p)) {
    fail(where, "not a projection (||P^2 - P|| = " + fmt(idempotency_defect(p)) +
                    ", ||P - P*|| = " + fmt(hermiticity_defect(p)) + ")");
  }
  return p;
}

LinearFunctional parse_state(const BlockAlgebra& alg, const json* spec) {
  if (spec == nullptr) return LinearFunctional::trace(alg);
  const std::string where = "system.state";
  if (!spec->is_object()) fail(where, "expected an object");
  const json& kind_json = require(*spec, "kind", where);
  if (!kind_json.is_string()) fail(where + ".kind", "expected a string");
  const std::string kind = kind_json.get<std::string>();
  if (kind == "trace") {
    reject_unknown(*spec, {"kind"}, where);
    return LinearFunctional::trace(alg);
  }
  if (kind == "density") {
    reject_unknown(*spec, {"kind", "blocks"}, where);
    return LinearFunctional::density_state(alg, as_element(alg, require(*spec, "blocks", where),
                                                           where + ".blocks"));
  }
  if (kind == "vector") {
    reject_unknown(*spec, {"kind", "block", "vector"}, where);
    const std::size_t block = as_count(require(*spec, "block", where), where + ".block");
    if (block >= alg.block_count()) fail(where + ".block", "no such block");
    const json& vec = require(*spec, "vector", where);
    if (!vec.is_array() || vec.size() != alg.dim(block)) {
      fail(where + ".vector", "expected " + std::to_string(alg.dim(block)) + " entries");
    }
    std::vector<Complex> psi;
    for (std::size_t i = 0; i < vec.size(); ++i) {
      psi.push_back(as_complex(vec[i], where + ".vector[" + std::to_string(i) + "]"));
    }
    if (vector_norm(psi) == 0.0) fail(where + ".vector", "vector must be nonzero");
    return LinearFunctional::vector_state(alg, block, psi);
  }
  fail(where + ".kind", "expected trace, density or vector");
}

QuantumSystemSpec parse_quantum(const json& sys) {
  reject_unknown(sys, {"kind", "block_dims", "block_weights", "hamiltonian", "endomorphism",
                       "projection", "state"},
                 "system");
  BlockAlgebra alg = parse_algebra(sys);

  std::optional<AlgebraElement> hamiltonian;
  if (sys.contains("hamiltonian")) {
    AlgebraElement h = as_element(alg, sys["hamiltonian"], "system.hamiltonian");
    for (std::size_t k = 0; k < alg.block_count(); ++k) {
      const double defect = hermiticity_defect(h.block(k));
      if (defect > 1e-10) {
        fail("system.hamiltonian[" + std::to_string(k) + "]",
             "not Hermitian (||H - H*|| = " + fmt(defect) + ")");
      }
    }
    hamiltonian = std::move(h);
  }

  std::optional<Endomorphism> endomorphism;
  if (sys.contains("endomorphism")) {
    if (hamiltonian) fail("system", "give either a hamiltonian or an endomorphism, not both");
    const json& spec = sys["endomorphism"];
    const std::string where = "system.endomorphism";
    if (!spec.is_object()) fail(where, "expected an object");
    reject_unknown(spec, {"block_map", "unitary"}, where);
    std::vector<std::size_t> block_map = as_indices(require(spec, "block_map", where), where + ".block_map");
    AlgebraElement u = spec.contains("unitary") ? as_element(alg, spec["unitary"], where + ".unitary")
                                                : alg.identity();
    try {
      endomorphism.emplace(alg, std::move(block_map), std::move(u));
    } catch (const Error& e) {
      fail(where, e.what());
    }
  }

  AlgebraElement p = parse_projection(alg, require(sys, "projection", "system"));
  LinearFunctional state = parse_state(alg, sys.contains("state") ? &sys["state"] : nullptr);
  return QuantumSystemSpec{std::move(alg), std::move(hamiltonian), std::move(endomorphism),
                           std::move(p), std::move(state)};
}

ClassicalSystemSpec parse_classical(const json& sys) {
  reject_unknown(sys, {"kind", "weights", "map", "subset"}, "system");
  const std::vector<double> weights = as_numbers(require(sys, "weights", "system"), "system.weights");
  const std::vector<std::size_t> map = as_indices(require(sys, "map", "system"), "system.map");
  if (map.size() != weights.size()) {
    fail("system.map", "expected " + std::to_string(weights.size()) + " entries");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) fail("system.weights[" + std::to_string(i) + "]", "must be nonnegative");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    fail("system.weights", "weights must sum to 1 (sum = " + fmt(sum) + ")");
  }
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] >= weights.size()) fail("system.map[" + std::to_string(i) + "]", "index out of range");
  }
  PointSet subset = as_indices(require(sys, "subset", "system"), "system.subset");
  for (std::size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] >= weights.size()) {
      fail("system.subset[" + std::to_string(i) + "]", "index out of range");
    }
  }
  return ClassicalSystemSpec{ClassicalSystem(weights, map), std::move(subset)};
}

TimeGrid parse_grid(const json& v) {
  const std::string where = "params.t_grid";
  if (v.is_array()) return TimeGrid{as_numbers(v, where)};
  if (!v.is_object()) fail(where, "expected an array or {start, stop, count}");
  reject_unknown(v, {"start", "stop", "count"}, where);
  const double start = as_number(require(v, "start", where), where + ".start");
  const double stop = as_number(require(v, "stop", where), where + ".stop");
  const std::size_t count = as_count(require(v, "count", where), where + ".count");
  if (count < 2) fail(where + ".count", "need at least two points");
  TimeGrid grid;
  for (std::size_t i = 0; i < count; ++i) {
    grid.points.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  return grid;
}

Params parse_params(const json* v) {
  Params p;
  if (v == nullptr) return p;
  const std::string where = "params";
  if (!v->is_object()) fail(where, "expected an object");
  reject_unknown(*v, {"k_max", "t_step", "epsilon", "threshold", "n_max", "samples", "count",
                      "t_grid", "tol"},
                 where);
  if (v->contains("k_max")) p.k_max = as_count((*v)["k_max"], "params.k_max");
  if (v->contains("t_step")) p.t_step = as_number((*v)["t_step"], "params.t_step");
  if (v->contains("epsilon")) p.epsilon = as_number((*v)["epsilon"], "params.epsilon");
  if (v->contains("threshold")) p.threshold = as_number((*v)["threshold"], "params.threshold");
  if (v->contains("n_max")) p.n_max = as_count((*v)["n_max"], "params.n_max");
  if (v->contains("samples")) p.samples = as_count((*v)["samples"], "params.samples");
  if (v->contains("count")) p.count = as_count((*v)["count"], "params.count");
  if (v->contains("t_grid")) p.t_grid = parse_grid((*v)["t_grid"]);
  if (v->contains("tol")) p.tol = as_number((*v)["tol"], "params.tol");

  if (p.k_max == 0) fail("params.k_max", "must be positive");
  if (p.t_step && !(*p.t_step > 0.0)) fail("params.t_step", "must be positive");
  if (!(p.epsilon > 0.0)) fail("params.epsilon", "must be positive");
  if (p.threshold < 0.0) fail("params.threshold", "must be nonnegative");
  if (p.n_max == 0) fail("params.n_max", "must be positive");
  if (p.samples == 0) fail("params.samples", "must be positive");
  if (p.tol && !(*p.tol > 0.0)) fail("params.tol", "must be positive");
  return p;
}

void check_compatibility(const Scenario& s) {
  const auto& q = s.quantum;
  const std::string name(to_string(s.experiment));
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) fail("experiment " + name, what);
  };
  const bool has_h = q && q->hamiltonian;
  switch (s.experiment) {
    case Experiment::Liouville:
      need(has_h, "needs a quantum system with a hamiltonian");
      need(s.params.t_grid.has_value(), "needs params.t_grid");
      break;
    case Experiment::Continuous:
      need(has_h, "needs a quantum system with a hamiltonian");
      need(q->algebra.is_factor(), "needs a single-block (factor) algebra");
      need(s.params.t_grid.has_value(), "needs params.t_grid");
      break;
    case Experiment::Moments:
      need(has_h, "needs a quantum system with a hamiltonian");
      need(s.params.t_step.has_value(), "needs params.t_step");
      break;
    case Experiment::Recurrence:
    case Experiment::Khintchine:
      need(s.classical || (q && q->endomorphism) || (has_h && s.params.t_step),
           "needs dynamics: a classical map, an endomorphism, or a hamiltonian with params.t_step");
      break;
    case Experiment::GnsVerify:
      break;
    case Experiment::Prop31:
      need(s.classical.has_value(), "needs a classical system");
      break;
    case Experiment::LudersDemo:
      need(q.has_value(), "needs a quantum system");
      break;
  }
}

}  // namespace

std::string_view to_string(Experiment e) noexcept {
  for (const auto& [value, name] : kExperiments) {
    if (value == e) return name;
  }
  return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) noexcept {
  for (const auto& [value, text] : kExperiments) {
    if (text == name) return value;
  }
  return std::nullopt;
}

Scenario parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("scenario", "expected a JSON object");
  reject_unknown(root, {"schema_version", "name", "description", "seed", "experiment", "system",
                        "params"},
                 "scenario");

  Scenario s;
  const json& version = require(root, "schema_version", "scenario");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    fail("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  const json& name = require(root, "name", "scenario");
  if (!name.is_string() || name.get<std::string>().empty()) fail("name", "expected a non-empty string");
  s.name = name.get<std::string>();
  for (char c : s.name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    if (!ok) fail("name", "only letters, digits, '-', '_' and '.' are allowed");
  }
  if (root.contains("description")) {
    if (!root["description"].is_string()) fail("description", "expected a string");
    s.description = root["description"].get<std::string>();
  }
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    s.seed = root["seed"].get<std::uint64_t>();
  }
  const json& experiment = require(root, "experiment", "scenario");
  if (!experiment.is_string()) fail("experiment", "expected a string");
  const auto parsed = parse_experiment(experiment.get<std::string>());
  if (!parsed) fail("experiment", "unknown experiment \"" + experiment.get<std::string>() + "\"");
  s.experiment = *parsed;

  const json& sys = require(root, "system", "scenario");
  if (!sys.is_object()) fail("system", "expected an object");
  const json& kind = require(sys, "kind", "system");
  try {
    if (kind == "quantum") {
      s.quantum = parse_quantum(sys);
    } else if (kind == "classical") {
      s.classical = parse_classical(sys);
    } else {
      fail("system.kind", "expected quantum or classical");
    }
  } catch (const Error& e) {
    throw ScenarioError(std::string("system: ") + e.what());
  }
  s.params = parse_params(root.contains("params") ? &root["params"] : nullptr);
  check_compatibility(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::optional<std::string_view> find_bundled(std::string_view name) {
  for (const auto& b : bundled_scenarios()) {
    if (b.name == name) return b.text;
  }
  return std::nullopt;
}

}  // namespace vnrecur::cli
