#include "vnrecur/cli/runner.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "vnrecur/classical.hpp"
#include "vnrecur/errors.hpp"
#include "vnrecur/gns.hpp"
#include "vnrecur/recurrence.hpp"

namespace vnrecur::cli {

namespace {

using Json = nlohmann::ordered_json;

struct CsvRow {
  double x = 0.0;
  double correlation = 0.0;
  double threshold = 0.0;
  bool in_e = false;
};

// Discrete dynamics in algebraic form: classical systems go through the
// diagonal embedding, Hamiltonians through the step propagator.
struct Model {
  LinearFunctional phi;
  AlgebraElement p;
  Endomorphism tau;
};

struct Run {
  explicit Run(const Scenario& s) : scenario(s), params(s.params) {}

  const Scenario& scenario;
  Params params;
  std::uint64_t seed = 0;
  double tol = kDefaultTolerance;
  Json report;
  std::vector<CsvRow> rows;
  std::vector<std::string> lines;
  std::vector<InvariantResult> invariants;

  void check(std::string name, bool ok, std::string detail) {
    invariants.push_back(InvariantResult{std::move(name), ok, std::move(detail)});
  }
  void note(const std::string& key, const std::string& value) { lines.push_back(key + ": " + value); }
};

std::string num(double x) { return format_number(x); }

std::string count(std::size_t n) { return std::to_string(n); }

Json optional_count(const std::optional<std::size_t>& n) { return n ? Json(*n) : Json(nullptr); }

bool is_code(const Error& e, std::initializer_list<ErrorCode> codes) {
  return std::find(codes.begin(), codes.end(), e.code()) != codes.end();
}

std::optional<Model> build_model(Run& run, const std::optional<BoundedQuantumSystem>& sys,
                                 const std::optional<DiagonalEmbedding>& emb) {
  const Scenario& s = run.scenario;
  if (s.classical) {
    if (!emb) return std::nullopt;
    return Model{emb->state, emb->indicator(s.classical->subset), emb->koopman};
  }
  const QuantumSystemSpec& q = *s.quantum;
  if (q.endomorphism) return Model{q.state, q.projection, *q.endomorphism};
  if (sys && run.params.t_step) return Model{q.state, q.projection, sys->step(*run.params.t_step)};
  return std::nullopt;
}

CorrelationSequence correlation_section(Run& run, const Model& model,
                                        const std::optional<BoundedQuantumSystem>& sys) {
  const Params& params = run.params;
  const CorrelationSequence seq =
      (sys && params.t_step && !run.scenario.quantum->endomorphism)
          ? correlation_sequence(model.phi, model.p, *sys, *params.t_step, params.k_max)
          : correlation_sequence(model.phi, model.p, model.tau, params.k_max);
  const std::optional<std::size_t> first = first_recurrence(seq, params.threshold);
  const PoincareBound bound = poincare_bound(seq, params.threshold);

  double lowest = seq.values.front();
  double highest = seq.values.front();
  for (double c : seq.values) {
    lowest = std::min(lowest, c);
    highest = std::max(highest, c);
  }
  const double threshold = khintchine_threshold(seq.phi_p, params.epsilon);
  if (run.scenario.experiment != Experiment::Continuous) {
    for (std::size_t k = 1; k <= seq.k_max(); ++k) {
      run.rows.push_back(CsvRow{static_cast<double>(k), seq.at(k), threshold, seq.at(k) > threshold});
    }
  }

  run.report["first_recurrence"] = optional_count(first);
  Json section;
  section["phi_p"] = seq.phi_p;
  section["k_max"] = seq.k_max();
  section["t_step"] = seq.t_step ? Json(*seq.t_step) : Json(nullptr);
  section["aliased"] = seq.aliased;
  section["threshold"] = params.threshold;
  section["zero_prefix"] = bound.zero_prefix;
  section["poincare_product"] = bound.product;
  section["poincare_holds"] = bound.holds;
  section["min_value"] = lowest;
  section["max_value"] = highest;
  run.report["correlation"] = section;

  run.note("phi(P)", num(seq.phi_p));
  run.note("first_recurrence", first ? count(*first) : "none");
  run.note("poincare N*phi(P)", num(bound.product));
  if (seq.aliased) run.note("warning", "t_step is a period of the dynamics; sequence is constant");

  run.check("correlation.range", lowest >= -kPositivityThreshold && highest <= seq.phi_p + 1e-12,
            "c_k in [" + num(lowest) + ", " + num(highest) + "], phi(P) = " + num(seq.phi_p));
  return seq;
}

GnsSpace gns_section(Run& run, const LinearFunctional& phi, const Endomorphism* tau) {
  GnsOptions options;
  options.seed = run.seed;
  GnsSpace space = gns_construct(phi, options);
  if (tau != nullptr) space = extend_endomorphism(std::move(space), *tau, options);
  const GnsVerification v = verify_gns(space);

  Json section;
  section["dim"] = space.dim();
  section["max_inner_product_error"] = v.max_inner_product_error;
  section["max_expectation_error"] = v.max_expectation_error;
  section["max_representation_error"] = v.max_representation_error;
  section["has_dynamics"] = space.has_dynamics();
  if (space.has_dynamics()) {
    section["tau_bar_norm"] = v.tau_bar_norm;
    section["max_intertwining_error"] = v.max_intertwining_error;
    section["omega_fixed_error"] = v.omega_fixed_error;
  }
  run.report["gns"] = section;
  run.note("gns dim", count(space.dim()));

  const double tol = run.tol;
  run.check("gns.inner_product", v.max_inner_product_error <= tol, num(v.max_inner_product_error));
  run.check("gns.expectation", v.max_expectation_error <= tol, num(v.max_expectation_error));
  run.check("gns.representation", v.max_representation_error <= tol, num(v.max_representation_error));
  if (space.has_dynamics()) {
    run.check("gns.contraction", v.tau_bar_norm <= 1.0 + tol, "||tau_bar|| = " + num(v.tau_bar_norm));
    run.check("gns.intertwining", v.max_intertwining_error <= tol, num(v.max_intertwining_error));
    run.check("gns.omega_fixed", v.omega_fixed_error <= tol, num(v.omega_fixed_error));
  }
  return space;
}

void khintchine_section(Run& run, const GnsSpace& space, const Model& model,
                        const CorrelationSequence& seq) {
  const Params& params = run.params;
  const ErgodicProjection proj = ergodic_projection(space, model.p, params.epsilon, params.n_max);
  const KhintchineReport scan = khintchine_scan(seq, params.epsilon, proj.n);
  const KhintchineBoundReport bound = khintchine_bound_check(space, proj, model.p);

  Json section;
  section["applicable"] = true;
  section["epsilon"] = params.epsilon;
  section["threshold"] = scan.threshold;
  section["window_n"] = proj.n;
  section["fixed_dim"] = proj.fixed_dim;
  section["cesaro_target"] = proj.target;
  section["cesaro_error"] = proj.achieved_error;
  section["hit_count"] = scan.hits.size();
  section["first_hits"] = std::vector<std::size_t>(
      scan.hits.begin(), scan.hits.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(scan.hits.size(), 20)));
  section["max_gap"] = scan.max_gap;
  section["windows_checked"] = scan.windows_checked;
  section["violations"] = scan.violations;
  section["phi_p_sq"] = bound.phi_p_sq;
  section["xqx"] = bound.xqx;
  section["max_transfer_error"] = bound.max_transfer_error;
  section["bound_ok"] = bound.ok;
  run.report["khintchine"] = section;

  run.note("khintchine window n", count(proj.n));
  run.note("khintchine max_gap", count(scan.max_gap));
  run.check("khintchine.bound", bound.ok,
            "<x, Qx> = " + num(bound.xqx) + ", phi(P)^2 = " + num(bound.phi_p_sq));
  run.check("khintchine.windows", scan.violations == 0,
            count(scan.violations) + " of " + count(scan.windows_checked) +
                " windows of length " + count(proj.n) + " miss E");
}

void liouville_experiment(Run& run, const BoundedQuantumSystem& sys) {
  const std::vector<double>& grid = run.params.t_grid->points;
  const LiouvilleReport rep = verify_liouville(sys, run.params.samples, grid, run.seed);
  Json section;
  section["samples"] = run.params.samples;
  section["times"] = grid.size();
  section["evaluations"] = rep.evaluations;
  section["max_deviation"] = rep.max_deviation;
  run.report["liouville"] = section;
  run.check("liouville.trace_invariance", rep.max_deviation <= run.tol,
            "max |tr(tau_t(A)) - tr(A)| = " + num(rep.max_deviation));
}

void recurrence_experiment(Run& run, const CorrelationSequence& seq) {
  const std::optional<std::size_t> first = first_recurrence(seq, run.params.threshold);
  const PoincareBound bound = poincare_bound(seq, run.params.threshold);
  run.check("recurrence.found", first.has_value() || seq.phi_p <= run.params.threshold,
            first ? "n = " + count(*first) : "no recurrence within k_max = " + count(seq.k_max()));
  run.check("recurrence.poincare_bound", bound.holds,
            "N = " + count(bound.zero_prefix) + ", N*phi(P) = " + num(bound.product));

  if (!run.scenario.classical) return;
  const ClassicalSystemSpec& c = *run.scenario.classical;
  const ClassicalRecurrence cr = classical_recurrence(c.system, c.subset, seq.k_max());
  double diff = 0.0;
  for (std::size_t k = 1; k <= seq.k_max(); ++k) {
    diff = std::max(diff, std::abs(cr.overlaps[k - 1] - seq.at(k)));
  }
  Json section;
  section["first_n"] = optional_count(cr.first_n);
  section["max_overlap_difference"] = diff;
  run.report["classical"] = section;
  run.check("recurrence.classical_agreement", diff <= 1e-13 && cr.first_n == first,
            "max |mu(S & T^-n S) - c_n| = " + num(diff));
}

void continuous_experiment(Run& run, const BoundedQuantumSystem& sys, const AlgebraElement& p) {
  const ContinuousScan scan = continuous_scan(sys, p, run.params.t_grid->points);
  const double trace_p = trace(sys.algebra(), p).real();
  const double threshold = khintchine_threshold(trace_p, run.params.epsilon);
  for (const ContinuousSample& sample : scan.samples) {
    run.rows.push_back(CsvRow{sample.t, sample.value, threshold, sample.value > threshold});
  }
  Json section;
  section["samples"] = scan.samples.size();
  section["trace_p"] = trace_p;
  section["lipschitz_constant"] = scan.lipschitz_constant;
  section["max_lipschitz_excess"] = scan.max_lipschitz_excess;
  section["max_adjacent_jump"] = scan.max_adjacent_jump;
  run.report["continuous"] = section;
  run.check("continuous.lipschitz", scan.lipschitz_ok,
            "L = " + num(scan.lipschitz_constant) + ", excess = " + num(scan.max_lipschitz_excess));
}

void moments_experiment(Run& run, const BoundedQuantumSystem& sys, const AlgebraElement& p) {
  const Params& params = run.params;
  const double target = repeat_probability_threshold(trace(sys.algebra(), p).real(), params.epsilon);
  std::vector<RecurrenceMoment> moments;
  std::optional<std::string> exhausted;
  try {
    moments = recurrence_moments(sys, p, *params.t_step, params.count, params.n_max, params.threshold);
  } catch (const SearchExhaustedError& e) {
    moments = e.partial();
    exhausted = e.what();
  }
  Json list = Json::array();
  bool increasing = true;
  bool positive = true;
  double previous = 0.0;
  for (const RecurrenceMoment& m : moments) {
    Json entry;
    entry["step"] = m.step;
    entry["n"] = m.n;
    entry["time"] = m.time;
    entry["probability"] = m.probability;
    // The iteration only guarantees omega > 0 at a moment; a window exists
    // where omega also clears the target.
    try {
      entry["window"] = recurrence_window(sys, p, m.time, m.step / 2.0, target);
    } catch (const Error& e) {
      if (!is_code(e, {ErrorCode::CenterFails, ErrorCode::WindowTooNarrow})) throw;
      entry["window"] = nullptr;
      entry["window_note"] = std::string(to_string(e.code()));
    }
    increasing = increasing && m.time > previous;
    positive = positive && m.probability > params.threshold;
    previous = m.time;
    list.push_back(entry);
  }
  Json section;
  section["target"] = target;
  section["moments"] = list;
  run.report["moments"] = section;
  run.check("moments.found", !exhausted && moments.size() == params.count,
            exhausted ? *exhausted : count(moments.size()) + " moments");
  run.check("moments.increasing", increasing, "moments strictly increase");
  run.check("moments.positive", positive, "omega(tau_m(P)) > threshold at every moment");
}

void prop31_experiment(Run& run, const std::optional<Model>& model,
                       const std::optional<CorrelationSequence>& seq) {
  const ClassicalSystemSpec& c = *run.scenario.classical;
  const Prop31Report r = check_prop31(c.system, run.tol, run.seed, run.params.samples);
  Json section;
  section["measure_preserving"] = r.measure_preserving;
  section["functional_invariant"] = r.functional_invariant;
  section["equivalent"] = r.equivalent;
  run.report["prop31"] = section;
  run.check("prop31.equivalence", r.equivalent,
            std::string("measure preserving: ") + (r.measure_preserving ? "yes" : "no") +
                ", functional invariant: " + (r.functional_invariant ? "yes" : "no"));
  if (!r.measure_preserving || !model || !seq || !(c.system.measure(c.subset) > 0.0)) return;
  const ClassicalRecurrence cr = classical_recurrence(c.system, c.subset, seq->k_max());
  double diff = 0.0;
  for (std::size_t k = 1; k <= seq->k_max(); ++k) {
    diff = std::max(diff, std::abs(cr.overlaps[k - 1] - seq->at(k)));
  }
  run.report["prop31"]["max_embedded_difference"] = diff;
  run.check("prop31.embedded_agreement", diff <= 1e-13, "max |mu(S & T^-n S) - c_n| = " + num(diff));
}

void luders_experiment(Run& run, const QuantumSystemSpec& q, const std::optional<BoundedQuantumSystem>& sys) {
  const LinearFunctional updated = luders_update(q.state, q.projection);
  const double one = updated(q.algebra.identity()).real();
  const double certain = updated(q.projection).real();
  Rng rng(run.seed);
  double lowest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < run.params.samples; ++i) {
    const AlgebraElement a = q.algebra.random_element(rng);
    lowest = std::min(lowest, updated(a.adjoint() * a).real());
  }
  const double repeat = luders_update(updated, q.projection)(q.projection).real();

  Json section;
  section["prior_probability"] = q.state(q.projection).real();
  section["normalization"] = one;
  section["updated_probability"] = certain;
  section["min_positive_value"] = lowest;
  section["repeat_probability"] = repeat;
  if (sys && run.params.t_step) {
    section["delayed_repeat_probability"] = repeat_probability(*sys, q.projection, *run.params.t_step);
  }
  run.report["luders"] = section;
  run.check("luders.normalized", std::abs(one - 1.0) <= run.tol, "omega'(1) = " + num(one));
  run.check("luders.certain", std::abs(certain - 1.0) <= run.tol, "omega'(P) = " + num(certain));
  run.check("luders.positive", lowest >= -1e-11, "min omega'(A*A) = " + num(lowest));
  run.check("luders.repeat", std::abs(repeat - 1.0) <= run.tol, "repeat probability = " + num(repeat));
}

std::string render_csv(const std::vector<CsvRow>& rows) {
  std::string out = "k_or_t,correlation,threshold,in_E\n";
  for (const CsvRow& r : rows) {
    out += num(r.x) + "," + num(r.correlation) + "," + num(r.threshold) + "," + (r.in_e ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

double resolve_tolerance(std::optional<double> cli, std::optional<double> scenario,
                         const char* env_value) {
  if (cli) return *cli;
  if (scenario) return *scenario;
  if (env_value != nullptr && *env_value != '\0') {
    char* end = nullptr;
    errno = 0;
    const double value = std::strtod(env_value, &end);
    if (errno != 0 || end == env_value || *end != '\0' || !(value > 0.0) || !std::isfinite(value)) {
      throw ScenarioError(std::string("VNRECUR_TOL: expected a positive number, got \"") + env_value + "\"");
    }
    return value;
  }
  return kDefaultTolerance;
}

RunOutput run_scenario(const Scenario& scenario, const RunOptions& options) {
  Run run(scenario);
  if (options.k_max) run.params.k_max = *options.k_max;
  run.seed = options.seed.value_or(scenario.seed);
  run.tol = options.tolerance;

  run.report["schema_version"] = kSchemaVersion;
  run.report["name"] = scenario.name;
  run.report["experiment"] = std::string(to_string(scenario.experiment));
  run.report["seed"] = run.seed;
  run.report["tolerance"] = run.tol;
  run.report["k_max"] = run.params.k_max;
  run.report["first_recurrence"] = nullptr;

  run.note("scenario", scenario.name);
  if (!scenario.description.empty()) run.note("description", scenario.description);
  run.note("experiment", std::string(to_string(scenario.experiment)));
  run.note("seed", std::to_string(run.seed));
  run.note("tolerance", num(run.tol));

  std::optional<std::string> error;
  try {
    std::optional<BoundedQuantumSystem> sys;
    if (scenario.quantum && scenario.quantum->hamiltonian) {
      sys.emplace(scenario.quantum->algebra, *scenario.quantum->hamiltonian);
    }
    std::optional<DiagonalEmbedding> emb;
    if (scenario.classical) {
      try {
        emb = embed_diagonal(scenario.classical->system);
      } catch (const Error& e) {
        if (scenario.experiment != Experiment::Prop31) throw;
        run.note("embedding", std::string("skipped (") + e.what() + ")");
      }
    }
    const std::optional<Model> model = build_model(run, sys, emb);
    std::optional<CorrelationSequence> seq;
    if (model) seq = correlation_section(run, *model, sys);

    switch (scenario.experiment) {
      case Experiment::Liouville:
        liouville_experiment(run, *sys);
        break;
      case Experiment::Recurrence:
        recurrence_experiment(run, *seq);
        break;
      case Experiment::Khintchine:
        require_contractive(model->phi, model->tau, run.params.samples, run.seed, run.tol);
        break;
      case Experiment::Continuous:
        continuous_experiment(run, *sys, scenario.quantum->projection);
        break;
      case Experiment::Moments:
        moments_experiment(run, *sys, scenario.quantum->projection);
        break;
      case Experiment::Prop31:
        prop31_experiment(run, model, seq);
        break;
      case Experiment::LudersDemo:
        luders_experiment(run, *scenario.quantum, sys);
        break;
      case Experiment::GnsVerify:
        break;
    }

    // Khintchine's certificate needs a state that the dynamics does not
    // expand; outside the khintchine and gns-verify experiments a failed
    // hypothesis only marks the section as not applicable.
    const bool required =
        scenario.experiment == Experiment::Khintchine || scenario.experiment == Experiment::GnsVerify;
    if (model) {
      try {
        const GnsSpace space = gns_section(run, model->phi, &model->tau);
        khintchine_section(run, space, *model, *seq);
      } catch (const Error& e) {
        if (required || !is_code(e, {ErrorCode::SubInvarianceViolated, ErrorCode::NullSpaceLeak,
                                     ErrorCode::NMaxExceeded})) {
          throw;
        }
        run.report["khintchine"] = Json{{"applicable", false}, {"reason", e.what()}};
        run.note("khintchine", std::string("not applicable (") + e.what() + ")");
      }
    } else if (scenario.experiment == Experiment::GnsVerify) {
      const LinearFunctional phi = scenario.quantum ? scenario.quantum->state : emb->state;
      gns_section(run, phi, nullptr);
    }
  } catch (const Error& e) {
    error = e.what();
  }

  RunOutput out;
  out.name = scenario.name;
  out.invariants = run.invariants;
  out.error = error;
  out.ok = !error;
  Json invariants = Json::array();
  for (const InvariantResult& inv : run.invariants) {
    out.ok = out.ok && inv.ok;
    invariants.push_back(Json{{"name", inv.name}, {"ok", inv.ok}, {"detail", inv.detail}});
  }
  run.report["invariants"] = invariants;
  run.report["error"] = error ? Json(*error) : Json(nullptr);
  run.report["status"] = out.ok ? "ok" : (error ? "error" : "invariant-failure");

  std::ostringstream summary;
  for (const std::string& line : run.lines) summary << line << '\n';
  summary << "invariants:\n";
  for (const InvariantResult& inv : run.invariants) {
    summary << "  [" << (inv.ok ? "ok" : "FAIL") << "] " << inv.name << ": " << inv.detail << '\n';
  }
  if (error) summary << "error: " << *error << '\n';
  summary << "status: " << run.report["status"].get<std::string>() << '\n';

  out.summary = summary.str();
  out.report = run.report.dump(2) + "\n";
  out.csv = render_csv(run.rows);
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open " + tmp.string() + " for writing");
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    file.flush();
    if (!file) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string());
  }
}

void write_outputs(const RunOutput& output, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  write_file_atomic(dir / (output.name + ".summary.txt"), output.summary);
  write_file_atomic(dir / (output.name + ".report.json"), output.report);
  write_file_atomic(dir / (output.name + ".csv"), output.csv);
}

}  // namespace vnrecur::cli
