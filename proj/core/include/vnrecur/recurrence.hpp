#pragma once

// Recurrence analytics on correlation sequences c_k = phi(P tau^k(P) P).

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vnrecur/algebra.hpp"
#include "vnrecur/dynamics.hpp"
#include "vnrecur/errors.hpp"

namespace vnrecur {

// Floating point cannot certify strict positivity; "c > 0" is read as
// "c > kPositivityThreshold" unless the caller passes another threshold.
inline constexpr double kPositivityThreshold = 1e-12;

struct CorrelationSequence {
  // values[k-1] = Re phi(P tau^k(P) P), k = 1..k_max
  std::vector<double> values;
  double phi_p = 0.0;
  // Set when the sequence samples a Hamiltonian flow at multiples of t_step.
  std::optional<double> t_step;
  // t_step sits on a period of the flow, so every sample repeats k = 0.
  bool aliased = false;

  std::size_t k_max() const noexcept { return values.size(); }
  double at(std::size_t k) const { return values.at(k - 1); }
};

// Throws NotProjection, ShapeMismatch, and InvariantViolated if some
// phi(P tau^k(P) P) has an imaginary part above 1e-12.
CorrelationSequence correlation_sequence(const LinearFunctional& phi, const AlgebraElement& p,
                                         const Endomorphism& tau, std::size_t k_max);
CorrelationSequence correlation_sequence(const LinearFunctional& phi, const AlgebraElement& p,
                                         const BoundedQuantumSystem& sys, double t_step,
                                         std::size_t k_max);

// Least n with c_n > threshold.
std::optional<std::size_t> first_recurrence(const CorrelationSequence& seq,
                                            double threshold = kPositivityThreshold);

struct PoincareBound {
  std::size_t zero_prefix = 0;  // N: leading values with c_k <= threshold
  double product = 0.0;         // N * phi(P)
  bool holds = false;           // N * phi(P) <= 1 + tol
};

// Without recurrence in 1..N an additive trace-compatible phi forces
// N * phi(P) <= 1.
PoincareBound poincare_bound(const CorrelationSequence& seq,
                             double threshold = kPositivityThreshold, double tol = 1e-9);

struct KhintchineReport {
  double epsilon = 0.0;
  double threshold = 0.0;          // phi(P)^2 - epsilon
  std::vector<std::size_t> hits;   // E: k with c_k > threshold, ascending
  // Largest difference between consecutive elements of E and {0}; k_max + 1
  // when E is empty.
  std::size_t max_gap = 0;
  std::optional<std::size_t> window_n;  // certified window, if supplied
  bool certified = false;               // window_n supplied
  std::size_t windows_checked = 0;
  std::size_t violations = 0;           // windows of length window_n missing E
};

double khintchine_threshold(double phi_p, double epsilon);
// Threshold of the repeat-measurement form omega(tau(P)) > tr(P) - epsilon.
double repeat_probability_threshold(double trace_p, double epsilon);

// Throws InvalidArgument for epsilon <= 0.
KhintchineReport khintchine_scan(const CorrelationSequence& seq, double epsilon,
                                 std::optional<std::size_t> window_n = std::nullopt);

// Samples phi(tau(A*A)) <= phi(A*A) + tol over the matrix units and seeded
// random A. Throws ContractivityViolated.
void require_contractive(const LinearFunctional& phi, const Endomorphism& tau,
                         std::size_t sample_count, std::uint64_t seed, double tol = 1e-10);

struct ContinuousSample {
  double t = 0.0;
  double value = 0.0;  // tr(P tau_t(P))
};

struct ContinuousScan {
  std::vector<ContinuousSample> samples;
  double lipschitz_constant = 0.0;  // 2 ||H||_op
  // max over adjacent samples of |f(t) - f(s)| - L |t - s|
  double max_lipschitz_excess = 0.0;
  bool lipschitz_ok = true;         // excess <= 1e-9 everywhere
  double max_adjacent_jump = 0.0;
};

// Throws NotFactor for multi-block algebras and NotProjection.
ContinuousScan continuous_scan(const BoundedQuantumSystem& sys, const AlgebraElement& p,
                               std::span<const double> t_grid);

struct RecurrenceMoment {
  double step = 0.0;         // sampling step t of this round
  std::size_t n = 0;         // n(t)
  double time = 0.0;         // n(t) * t
  double probability = 0.0;  // omega(tau_time(P)), omega the Lueders-updated trace
};

class SearchExhaustedError : public Error {
 public:
  SearchExhaustedError(const std::string& message, std::vector<RecurrenceMoment> partial)
      : Error(ErrorCode::SearchExhausted, message), partial_(std::move(partial)) {}
  const std::vector<RecurrenceMoment>& partial() const noexcept { return partial_; }

 private:
  std::vector<RecurrenceMoment> partial_;
};

// Repeats: find n(t) by first recurrence at step t, emit n(t) t, continue
// with t' = n(t) t + 1. Throws SearchExhaustedError (carrying the moments
// found so far) when some round needs more than n_max steps.
std::vector<RecurrenceMoment> recurrence_moments(const BoundedQuantumSystem& sys,
                                                 const AlgebraElement& p, double t,
                                                 std::size_t count, std::size_t n_max = 100000,
                                                 double threshold = kPositivityThreshold);

// omega(tau_s(P)) with omega(A) = tr(PAP) / tr(P).
double repeat_probability(const BoundedQuantumSystem& sys, const AlgebraElement& p, double s);

struct WindowOptions {
  int halvings = 20;
  int samples = 9;  // evenly spaced over [m - delta, m + delta]
};

// Largest delta in {delta0 / 2^j : j = 0..halvings} whose sampled window
// around `moment` keeps omega(tau_s(P)) above target. Throws CenterFails
// and WindowTooNarrow.
double recurrence_window(const BoundedQuantumSystem& sys, const AlgebraElement& p, double moment,
                         double delta0, double target, const WindowOptions& options = {});

}  // namespace vnrecur
