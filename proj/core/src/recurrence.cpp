#include "vnrecur/recurrence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vnrecur/random.hpp"

namespace vnrecur {

namespace {

constexpr double kImaginaryTol = 1e-12;

void require_projection(const BlockAlgebra& alg, const AlgebraElement& p) {
  alg.require_contains(p);
  if (!is_projection(p)) {
    throw Error(ErrorCode::NotProjection,
                "||P^2 - P||_F = " + std::to_string(idempotency_defect(p)) +
                    ", ||P - P*||_F = " + std::to_string(hermiticity_defect(p)));
  }
}

double real_correlation(const LinearFunctional& phi, const AlgebraElement& p,
                        const AlgebraElement& moved, std::size_t k) {
  const Complex value = phi(p * moved * p);
  if (std::abs(value.imag()) > kImaginaryTol) {
    throw Error(ErrorCode::InvariantViolated, "phi(P tau^" + std::to_string(k) +
                                                  "(P) P) has imaginary part " +
                                                  std::to_string(value.imag()));
  }
  return value.real();
}

}  // namespace

CorrelationSequence correlation_sequence(const LinearFunctional& phi, const AlgebraElement& p,
                                         const Endomorphism& tau, std::size_t k_max) {
  if (!(phi.algebra() == tau.algebra())) {
    throw Error(ErrorCode::ShapeMismatch, "functional and endomorphism live on different algebras");
  }
  require_projection(phi.algebra(), p);
  CorrelationSequence seq;
  seq.phi_p = phi(p).real();
  seq.values.reserve(k_max);
  AlgebraElement moved = p;
  for (std::size_t k = 1; k <= k_max; ++k) {
    moved = tau(moved);
    seq.values.push_back(real_correlation(phi, p, moved, k));
  }
  return seq;
}

CorrelationSequence correlation_sequence(const LinearFunctional& phi, const AlgebraElement& p,
                                         const BoundedQuantumSystem& sys, double t_step,
                                         std::size_t k_max) {
  if (!(phi.algebra() == sys.algebra())) {
    throw Error(ErrorCode::ShapeMismatch, "functional and system live on different algebras");
  }
  require_projection(phi.algebra(), p);
  CorrelationSequence seq;
  seq.phi_p = phi(p).real();
  seq.t_step = t_step;
  seq.aliased = sys.is_period(t_step);
  seq.values.reserve(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    // Each U_{kt} comes straight from the spectrum, so no error accumulates.
    const AlgebraElement u = sys.propagator(static_cast<double>(k) * t_step);
    seq.values.push_back(real_correlation(phi, p, u.adjoint() * p * u, k));
  }
  return seq;
}

std::optional<std::size_t> first_recurrence(const CorrelationSequence& seq, double threshold) {
  for (std::size_t k = 1; k <= seq.k_max(); ++k) {
    if (seq.at(k) > threshold) return k;
  }
  return std::nullopt;
}

PoincareBound poincare_bound(const CorrelationSequence& seq, double threshold, double tol) {
  PoincareBound bound;
  while (bound.zero_prefix < seq.k_max() && seq.values[bound.zero_prefix] <= threshold) {
    ++bound.zero_prefix;
  }
  bound.product = static_cast<double>(bound.zero_prefix) * seq.phi_p;
  bound.holds = bound.product <= 1.0 + tol;
  return bound;
}

double khintchine_threshold(double phi_p, double epsilon) { return phi_p * phi_p - epsilon; }

double repeat_probability_threshold(double trace_p, double epsilon) { return trace_p - epsilon; }

KhintchineReport khintchine_scan(const CorrelationSequence& seq, double epsilon,
                                 std::optional<std::size_t> window_n) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  KhintchineReport report;
  report.epsilon = epsilon;
  report.threshold = khintchine_threshold(seq.phi_p, epsilon);
  for (std::size_t k = 1; k <= seq.k_max(); ++k) {
    if (seq.at(k) > report.threshold) report.hits.push_back(k);
  }
  if (report.hits.empty()) {
    report.max_gap = seq.k_max() + 1;
  } else {
    std::size_t previous = 0;
    for (auto k : report.hits) {
      report.max_gap = std::max(report.max_gap, k - previous);
      previous = k;
    }
  }

  report.window_n = window_n;
  report.certified = window_n.has_value();
  if (window_n && *window_n >= 1 && *window_n <= seq.k_max()) {
    const std::size_t n = *window_n;
    // next_hit[k]: smallest element of E that is >= k.
    std::vector<std::size_t> next_hit(seq.k_max() + 2, seq.k_max() + 1);
    for (std::size_t k = seq.k_max(); k >= 1; --k) {
      next_hit[k] = seq.at(k) > report.threshold ? k : next_hit[k + 1];
    }
    for (std::size_t j = 1; j + n - 1 <= seq.k_max(); ++j) {
      ++report.windows_checked;
      if (next_hit[j] > j + n - 1) ++report.violations;
    }
  }
  return report;
}

void require_contractive(const LinearFunctional& phi, const Endomorphism& tau,
                         std::size_t sample_count, std::uint64_t seed, double tol) {
  const BlockAlgebra& alg = phi.algebra();
  auto check = [&](const AlgebraElement& a, const char* what) {
    const AlgebraElement positive = a.adjoint() * a;
    const double before = phi(positive).real();
    const double after = phi(tau(positive)).real();
    if (after > before + tol) {
      throw Error(ErrorCode::ContractivityViolated,
                  std::string(what) + ": phi(tau(A*A)) = " + std::to_string(after) +
                      " exceeds phi(A*A) = " + std::to_string(before));
    }
  };
  for (std::size_t i = 0; i < alg.linear_dimension(); ++i) check(alg.matrix_unit(i), "matrix unit");
  Rng rng(seed);
  for (std::size_t i = 0; i < sample_count; ++i) check(alg.random_element(rng), "random sample");
}

ContinuousScan continuous_scan(const BoundedQuantumSystem& sys, const AlgebraElement& p,
                               std::span<const double> t_grid) {
  const BlockAlgebra& alg = sys.algebra();
  if (!alg.is_factor()) {
    throw Error(ErrorCode::NotFactor, "continuity scan needs a single-block algebra, got " +
                                          std::to_string(alg.block_count()) + " blocks");
  }
  require_projection(alg, p);
  ContinuousScan scan;
  scan.lipschitz_constant = 2.0 * sys.hamiltonian_norm();
  scan.samples.reserve(t_grid.size());
  for (double t : t_grid) {
    const Complex value = trace(alg, p * evolve(sys, t, p));
    scan.samples.push_back({t, value.real()});
  }
  for (std::size_t i = 1; i < scan.samples.size(); ++i) {
    const auto& a = scan.samples[i - 1];
    const auto& b = scan.samples[i];
    const double jump = std::abs(b.value - a.value);
    scan.max_adjacent_jump = std::max(scan.max_adjacent_jump, jump);
    const double excess = jump - scan.lipschitz_constant * std::abs(b.t - a.t);
    scan.max_lipschitz_excess = std::max(scan.max_lipschitz_excess, excess);
  }
  scan.lipschitz_ok = scan.max_lipschitz_excess <= 1e-9;
  return scan;
}

double repeat_probability(const BoundedQuantumSystem& sys, const AlgebraElement& p, double s) {
  const BlockAlgebra& alg = sys.algebra();
  const double trace_p = trace(alg, p).real();
  return trace(alg, p * evolve(sys, s, p) * p).real() / trace_p;
}

std::vector<RecurrenceMoment> recurrence_moments(const BoundedQuantumSystem& sys,
                                                 const AlgebraElement& p, double t,
                                                 std::size_t count, std::size_t n_max,
                                                 double threshold) {
  const BlockAlgebra& alg = sys.algebra();
  require_projection(alg, p);
  const double trace_p = trace(alg, p).real();
  if (!(trace_p > threshold)) throw Error(ErrorCode::NullSet, "tr(P) = 0");
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "sampling step must be positive");

  std::vector<RecurrenceMoment> moments;
  double step = t;
  for (std::size_t round = 0; round < count; ++round) {
    std::optional<RecurrenceMoment> found;
    for (std::size_t n = 1; n <= n_max && !found; ++n) {
      const double time = static_cast<double>(n) * step;
      const double correlation = trace(alg, p * evolve(sys, time, p) * p).real();
      if (correlation > threshold) found = RecurrenceMoment{step, n, time, correlation / trace_p};
    }
    if (!found) {
      throw SearchExhaustedError("no recurrence within n_max = " + std::to_string(n_max) +
                                     " steps of size " + std::to_string(step),
                                 std::move(moments));
    }
    moments.push_back(*found);
    step = found->time + 1.0;
  }
  return moments;
}

double recurrence_window(const BoundedQuantumSystem& sys, const AlgebraElement& p, double moment,
                         double delta0, double target, const WindowOptions& options) {
  require_projection(sys.algebra(), p);
  if (!(delta0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta0 must be positive");
  if (options.samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");
  const double center = repeat_probability(sys, p, moment);
  if (!(center > target)) {
    throw Error(ErrorCode::CenterFails, "omega(tau_m(P)) = " + std::to_string(center) +
                                            " does not exceed " + std::to_string(target));
  }
  double delta = delta0;
  for (int j = 0; j <= options.halvings; ++j, delta *= 0.5) {
    bool inside = true;
    for (int i = 0; i < options.samples && inside; ++i) {
      const double s = moment - delta + 2.0 * delta * i / (options.samples - 1);
      inside = repeat_probability(sys, p, s) > target;
    }
    if (inside) return delta;
  }
  throw Error(ErrorCode::WindowTooNarrow, "no window down to delta0 / 2^" +
                                              std::to_string(options.halvings));
}

}  // namespace vnrecur
