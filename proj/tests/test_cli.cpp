#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "vnrecur/cli/runner.hpp"
#include "vnrecur/cli/scenario.hpp"

using namespace vnrecur::cli;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kBundledNames = {"two-level",   "cycle4",       "cycle5-khintchine",
                                                "prop31-pair", "gns-trace-m2", "luders-m2"};

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("vnrecur_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string command = env + " " + VNRECUR_CLI_PATH + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture_cli(const std::string& args) {
  const std::string command = std::string(VNRECUR_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buffer[256];
  while (std::fgets(buffer, sizeof buffer, pipe) != nullptr) out += buffer;
  ::pclose(pipe);
  return out;
}

std::string validation_message(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  FAIL("expected a ScenarioError");
  return {};
}

Scenario bundled(const std::string& name) {
  const auto text = find_bundled(name);
  REQUIRE(text.has_value());
  return parse_scenario(*text);
}

const std::string kQuantumHeader = R"({"schema_version": 1, "name": "probe", )";

}  // namespace

TEST_CASE("list enumerates the six bundled scenarios") {
  const auto& all = bundled_scenarios();
  REQUIRE(all.size() == 6);
  for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].name == kBundledNames[i]);

  const std::string listed = capture_cli("list");
  std::size_t lines = 0;
  for (char c : listed) lines += c == '\n';
  CHECK(lines == 6);
  for (const auto& name : kBundledNames) CHECK(listed.find(name + "\n") != std::string::npos);
}

TEST_CASE("bundled scenarios match the files in scenarios/ and validate") {
  for (const auto& name : kBundledNames) {
    CAPTURE(name);
    const fs::path file = fs::path(VNRECUR_SCENARIO_DIR) / (name + ".json");
    CHECK(read_file(file) == std::string(*find_bundled(name)));
    const Scenario s = load_scenario(file.string());
    CHECK(s.name == name);
    CHECK(run_cli("validate " + file.string()) == 0);
    CHECK(run_cli("validate " + name) == 0);
  }
}

TEST_CASE("block weights that do not sum to one are rejected with exit 2") {
  const std::string text = kQuantumHeader + R"("experiment": "gns-verify", "system": {
      "kind": "quantum", "block_dims": [1, 1], "block_weights": [0.5, 0.6],
      "projection": {"blocks": [[[1]], [[0]]]}}})";
  const std::string message = validation_message(text);
  CHECK(message.find("block weights must sum to 1") != std::string::npos);
  CHECK(message.find("1.1") != std::string::npos);

  TempDir dir("weights");
  write_text(dir.path / "bad.json", text);
  CHECK(run_cli("validate " + (dir.path / "bad.json").string()) == 2);
  CHECK(run_cli("run " + (dir.path / "bad.json").string() + " --out " + (dir.path / "out").string()) == 2);
  CHECK_FALSE(fs::exists(dir.path / "out"));
}

TEST_CASE("a projection spec that is not idempotent names the defect") {
  const std::string text = kQuantumHeader + R"("experiment": "gns-verify", "system": {
      "kind": "quantum", "block_dims": [2], "projection": {"blocks": [[[1, 1], [1, 1]]]}}})";
  const std::string message = validation_message(text);
  CHECK(message.find("not a projection (||P^2 - P|| = ") != std::string::npos);

  TempDir dir("projection");
  write_text(dir.path / "p.json", text);
  const std::string out = capture_cli("validate " + (dir.path / "p.json").string());
  CHECK(out.find("not a projection") != std::string::npos);
}

TEST_CASE("spectral projection specs") {
  const std::string text = kQuantumHeader + R"("experiment": "gns-verify", "system": {
      "kind": "quantum", "block_dims": [2],
      "projection": {"observable": [[[0, [0, -1]], [[0, 1], 0]]], "interval": [0.5, 2]}}})";
  const Scenario s = parse_scenario(text);
  // +1 eigenprojection of sigma_y: (1/2)[[1, -i], [i, 1]].
  const auto& p = s.quantum->projection.block(0);
  CHECK(std::abs(p(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(p(0, 1) - std::complex<double>(0.0, -0.5)) < 1e-14);
  CHECK(std::abs(p(1, 0) - std::complex<double>(0.0, 0.5)) < 1e-14);
}

TEST_CASE("schema violations") {
  CHECK(validation_message("{").find("invalid JSON") != std::string::npos);
  CHECK(validation_message(R"({"name": "x"})").find("schema_version") != std::string::npos);
  CHECK(validation_message(R"({"schema_version": 2, "name": "x"})").find("unsupported version") !=
        std::string::npos);
  const std::string base = kQuantumHeader + R"("experiment": "gns-verify", "system": {
      "kind": "quantum", "block_dims": [2], "projection": {"blocks": [[[1, 0], [0, 0]]]}})";
  CHECK_NOTHROW(parse_scenario(base + "}"));
  CHECK(validation_message(base + R"(, "extra": 1})").find("unknown field \"extra\"") != std::string::npos);
  CHECK(validation_message(base + R"(, "params": {"kmax": 3}})").find("unknown field \"kmax\"") !=
        std::string::npos);
  CHECK(validation_message(base + R"(, "params": {"k_max": 0}})").find("params.k_max") !=
        std::string::npos);

  const std::string wrong_shape = kQuantumHeader + R"("experiment": "gns-verify", "system": {
      "kind": "quantum", "block_dims": [2], "projection": {"blocks": [[[1]]]}}})";
  CHECK(validation_message(wrong_shape).find("block must be 2x2") != std::string::npos);

  const std::string bad_complex = kQuantumHeader + R"("experiment": "gns-verify", "system": {
      "kind": "quantum", "block_dims": [1], "projection": {"blocks": [[[[1, 0, 0]]]]}}})";
  CHECK(validation_message(bad_complex).find("[re, im]") != std::string::npos);

  const std::string bad_name = R"({"schema_version": 1, "name": "../x", "experiment": "gns-verify",
      "system": {"kind": "quantum", "block_dims": [1], "projection": {"blocks": [[[1]]]}}})";
  CHECK(validation_message(bad_name).find("name") != std::string::npos);

  const std::string bad_map = R"({"schema_version": 1, "name": "c", "experiment": "recurrence",
      "system": {"kind": "classical", "weights": [0.5, 0.5], "map": [0, 2], "subset": [0]}})";
  CHECK(validation_message(bad_map).find("system.map[1]") != std::string::npos);

  const std::string no_dynamics = kQuantumHeader + R"("experiment": "recurrence", "system": {
      "kind": "quantum", "block_dims": [2], "projection": {"blocks": [[[1, 0], [0, 0]]]}}})";
  CHECK(validation_message(no_dynamics).find("needs dynamics") != std::string::npos);

  const std::string not_factor = kQuantumHeader + R"("experiment": "continuous", "system": {
      "kind": "quantum", "block_dims": [1, 1], "hamiltonian": [[[1]], [[2]]],
      "projection": {"blocks": [[[1]], [[0]]]}}, "params": {"t_grid": [0, 1]}})";
  CHECK(validation_message(not_factor).find("factor") != std::string::npos);

  const std::string not_hermitian = kQuantumHeader + R"("experiment": "liouville", "system": {
      "kind": "quantum", "block_dims": [2], "hamiltonian": [[[0, 1], [0, 0]]],
      "projection": {"blocks": [[[1, 0], [0, 0]]]}}, "params": {"t_grid": [0, 1]}})";
  CHECK(validation_message(not_hermitian).find("not Hermitian") != std::string::npos);
}

TEST_CASE("tolerance precedence") {
  CHECK(resolve_tolerance(1e-6, 1e-7, "1e-8") == 1e-6);
  CHECK(resolve_tolerance(std::nullopt, 1e-7, "1e-8") == 1e-7);
  CHECK(resolve_tolerance(std::nullopt, std::nullopt, "1e-8") == 1e-8);
  CHECK(resolve_tolerance(std::nullopt, std::nullopt, nullptr) == kDefaultTolerance);
  CHECK(resolve_tolerance(std::nullopt, std::nullopt, "") == kDefaultTolerance);
  CHECK_THROWS_AS(resolve_tolerance(std::nullopt, std::nullopt, "abc"), ScenarioError);
  CHECK_THROWS_AS(resolve_tolerance(std::nullopt, std::nullopt, "-1"), ScenarioError);

  TempDir dir("env");
  CHECK(run_cli("run cycle4 --out " + dir.path.string(), "VNRECUR_TOL=bogus") == 2);
  CHECK(run_cli("run cycle4 --out " + dir.path.string(), "VNRECUR_TOL=1e-9") == 0);
  const auto report = nlohmann::json::parse(read_file(dir.path / "cycle4.report.json"));
  CHECK(report["tolerance"].get<double>() == 1e-9);
}

TEST_CASE("two-level CSV follows cos^2(t)/2") {
  TempDir dir("twolevel");
  REQUIRE(run_cli("run two-level --out " + dir.path.string()) == 0);
  std::istringstream csv(read_file(dir.path / "two-level.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "k_or_t,correlation,threshold,in_E");
  std::size_t rows = 0;
  double worst = 0.0;
  while (std::getline(csv, line)) {
    double t = 0.0;
    double c = 0.0;
    double threshold = 0.0;
    int in_e = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%d", &t, &c, &threshold, &in_e) == 4);
    const double expected = oracle::two_level_correlation(t);
    CHECK(std::abs(expected - std::cos(t) * std::cos(t) / 2.0) < 1e-15);
    worst = std::max(worst, std::abs(c - expected));
    CHECK(std::abs(threshold - 0.15) < 1e-12);
    CHECK(in_e == (c > threshold ? 1 : 0));
    ++rows;
  }
  CHECK(rows == 1000);
  CHECK(worst <= 1e-10);
}

TEST_CASE("cycle4 report records the first recurrence") {
  const RunOutput out = run_scenario(bundled("cycle4"), RunOptions{});
  CHECK(out.ok);
  const auto report = nlohmann::json::parse(out.report);
  CHECK(report["first_recurrence"] == 4);
  CHECK(report["correlation"]["zero_prefix"] == 3);
  CHECK(report["status"] == "ok");
  CHECK(out.csv.find("4,0.25,") != std::string::npos);
}

TEST_CASE("cycle5-khintchine hits every fifth step") {
  const RunOutput out = run_scenario(bundled("cycle5-khintchine"), RunOptions{});
  CHECK(out.ok);
  const auto report = nlohmann::json::parse(out.report);
  CHECK(report["khintchine"]["max_gap"] == 5);
  CHECK(report["khintchine"]["violations"] == 0);
  CHECK(report["khintchine"]["hit_count"] == 2000);
  const auto hits = report["khintchine"]["first_hits"];
  for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == 5 * (i + 1));
}

TEST_CASE("every bundled scenario runs clean and is deterministic") {
  for (const auto& name : kBundledNames) {
    CAPTURE(name);
    const Scenario s = bundled(name);
    const RunOutput a = run_scenario(s, RunOptions{});
    const RunOutput b = run_scenario(s, RunOptions{});
    CHECK(a.ok);
    CHECK(a.summary == b.summary);
    CHECK(a.report == b.report);
    CHECK(a.csv == b.csv);
    CHECK(a.csv.find('\r') == std::string::npos);
    const auto report = nlohmann::json::parse(a.report);
    CHECK(report["khintchine"]["bound_ok"] == true);
  }

  TempDir first("det1");
  TempDir second("det2");
  for (const auto& name : kBundledNames) {
    REQUIRE(run_cli("run " + name + " --out " + first.path.string()) == 0);
    REQUIRE(run_cli("run " + name + " --out " + second.path.string()) == 0);
    for (const char* ext : {".summary.txt", ".report.json", ".csv"}) {
      CHECK(read_file(first.path / (name + ext)) == read_file(second.path / (name + ext)));
    }
  }
  for (const auto& entry : fs::directory_iterator(first.path)) {
    CHECK(entry.path().extension() != ".tmp");
  }
}

TEST_CASE("overrides for seed and k_max") {
  RunOptions options;
  options.k_max = 7;
  options.seed = 42;
  const auto report = nlohmann::json::parse(run_scenario(bundled("cycle4"), options).report);
  CHECK(report["k_max"] == 7);
  CHECK(report["seed"] == 42);

  TempDir dir("kmax");
  // The 4-cycle cannot recur within three steps.
  CHECK(run_cli("run cycle4 --kmax 3 --out " + dir.path.string()) == 3);
  const auto cli_report = nlohmann::json::parse(read_file(dir.path / "cycle4.report.json"));
  CHECK(cli_report["first_recurrence"].is_null());
}

TEST_CASE("a failing invariant exits 3 after writing the report") {
  const std::string text = R"({"schema_version": 1, "name": "liouville-m3", "experiment": "liouville",
      "system": {"kind": "quantum", "block_dims": [3],
        "hamiltonian": [[[1, [0, 1], 0], [[0, -1], 2, 0.5], [0, 0.5, -1]]],
        "projection": {"blocks": [[[1, 0, 0], [0, 0, 0], [0, 0, 0]]]}},
      "params": {"t_grid": [0.1, 0.5, 1, 5, 10], "samples": 10}})";
  TempDir dir("invariant");
  write_text(dir.path / "s.json", text);
  const std::string path = (dir.path / "s.json").string();
  const std::string out = (dir.path / "out").string();
  CHECK(run_cli("run " + path + " --out " + out) == 0);
  CHECK(run_cli("run " + path + " --out " + out + " --tol 1e-300") == 3);
  const auto report = nlohmann::json::parse(read_file(dir.path / "out" / "liouville-m3.report.json"));
  CHECK(report["status"] == "invariant-failure");
  CHECK(report["liouville"]["max_deviation"].get<double>() <= 1e-10);
}

TEST_CASE("an unwritable output directory exits 4") {
  TempDir dir("io");
  write_text(dir.path / "file", "x");
  CHECK(run_cli("run cycle4 --out " + (dir.path / "file").string()) == 4);
  CHECK(run_cli("run cycle4 --out " + (dir.path / "file" / "sub").string()) == 4);
}

TEST_CASE("moments and quantum khintchine experiments") {
  const std::string moments = R"({"schema_version": 1, "name": "m", "experiment": "moments",
      "system": {"kind": "quantum", "block_dims": [2], "hamiltonian": [[[1, 0], [0, -1]]],
        "projection": {"blocks": [[[0.5, 0.5], [0.5, 0.5]]]}},
      "params": {"t_step": 1.0, "count": 4}})";
  const RunOutput m = run_scenario(parse_scenario(moments), RunOptions{});
  CHECK(m.ok);
  const auto mr = nlohmann::json::parse(m.report);
  REQUIRE(mr["moments"]["moments"].size() == 4);
  CHECK(mr["moments"]["target"].get<double>() == doctest::Approx(0.4));
  // H = diag(1, -1), t = 1: c_1 > 0 in every round, so n = 1 and the moments
  // are 1, 2, 3, 4; omega(tau_s(P)) = cos^2(s).
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& entry = mr["moments"]["moments"][i];
    const double time = 1.0 + static_cast<double>(i);
    CHECK(entry["time"].get<double>() == doctest::Approx(time));
    CHECK(entry["probability"].get<double>() == doctest::Approx(std::cos(time) * std::cos(time)));
    CHECK(entry["window"].is_null() == (std::cos(time) * std::cos(time) <= 0.4));
  }

  // Block swap on M2 + M2 twisted by a fixed unitary.
  const std::string swap = R"({"schema_version": 1, "name": "k", "experiment": "khintchine",
      "system": {"kind": "quantum", "block_dims": [2, 2], "block_weights": [0.5, 0.5],
        "endomorphism": {"block_map": [1, 0],
          "unitary": [[[0, 1], [1, 0]], [[1, 0], [0, [0, 1]]]]},
        "projection": {"blocks": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]}},
      "params": {"k_max": 200, "epsilon": 0.01}})";
  const RunOutput k = run_scenario(parse_scenario(swap), RunOptions{});
  CHECK(k.ok);
  const auto kr = nlohmann::json::parse(k.report);
  CHECK(kr["khintchine"]["violations"] == 0);
  CHECK(kr["first_recurrence"] == 4);
}

TEST_CASE("a non-invariant classical map fails the khintchine hypotheses") {
  const std::string text = R"({"schema_version": 1, "name": "expanding", "experiment": "khintchine",
      "system": {"kind": "classical", "weights": [0.8, 0.2], "map": [1, 0], "subset": [1]}})";
  const RunOutput out = run_scenario(parse_scenario(text), RunOptions{});
  CHECK_FALSE(out.ok);
  REQUIRE(out.error.has_value());
}
