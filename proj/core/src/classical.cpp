#include "vnrecur/classical.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "vnrecur/errors.hpp"
#include "vnrecur/random.hpp"

namespace vnrecur {

ClassicalSystem::ClassicalSystem(std::vector<double> weights, std::vector<std::size_t> map)
    : weights_(std::move(weights)), map_(std::move(map)) {
  if (weights_.empty()) throw Error(ErrorCode::InvalidArgument, "system needs at least one point");
  if (map_.size() != weights_.size()) {
    throw Error(ErrorCode::InvalidArgument, "map has length " + std::to_string(map_.size()) +
                                                ", weights have length " +
                                                std::to_string(weights_.size()));
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!(weights_[i] >= 0.0) || !std::isfinite(weights_[i])) {
      throw Error(ErrorCode::InvalidArgument, "weight " + std::to_string(i) +
                                                  " must be finite and nonnegative");
    }
    if (map_[i] >= weights_.size()) {
      throw Error(ErrorCode::InvalidArgument, "map sends point " + std::to_string(i) +
                                                  " outside the space");
    }
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw Error(ErrorCode::InvalidArgument,
                "weights must sum to 1 (sum = " + std::to_string(total) + ")");
  }
}

std::vector<bool> ClassicalSystem::mask(const PointSet& s) const {
  std::vector<bool> out(size(), false);
  for (auto i : s) {
    if (i >= size()) {
      throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(i) + " out of range");
    }
    out[i] = true;
  }
  return out;
}

double ClassicalSystem::measure(const PointSet& s) const {
  const std::vector<bool> in = mask(s);
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (in[i]) total += weights_[i];
  }
  return total;
}

std::vector<double> ClassicalSystem::preimage_weights() const {
  std::vector<double> out(size(), 0.0);
  for (std::size_t j = 0; j < size(); ++j) out[map_[j]] += weights_[j];
  return out;
}

bool ClassicalSystem::is_measure_preserving(double tol) const {
  const std::vector<double> pulled = preimage_weights();
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::abs(pulled[i] - weights_[i]) > tol) return false;
  }
  return true;
}

std::size_t ClassicalSystem::orbit_point(std::size_t i, std::size_t n) const {
  for (std::size_t step = 0; step < n; ++step) i = map_.at(i);
  return i;
}

ClassicalFunction indicator(const ClassicalSystem& sys, const PointSet& s) {
  const std::vector<bool> in = sys.mask(s);
  ClassicalFunction out(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) out[i] = in[i] ? 1.0 : 0.0;
  return out;
}

ClassicalFunction koopman(const ClassicalSystem& sys, std::span<const Complex> g) {
  if (g.size() != sys.size()) {
    throw Error(ErrorCode::LengthMismatch, "function has length " + std::to_string(g.size()) +
                                               ", system has " + std::to_string(sys.size()) +
                                               " points");
  }
  ClassicalFunction out(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i) out[i] = g[sys.map()[i]];
  return out;
}

Complex integrate(const ClassicalSystem& sys, std::span<const Complex> g) {
  if (g.size() != sys.size()) throw Error(ErrorCode::LengthMismatch, "function length");
  Complex total = 0.0;
  for (std::size_t i = 0; i < sys.size(); ++i) total += sys.weights()[i] * g[i];
  return total;
}

Prop31Report check_prop31(const ClassicalSystem& sys, double tol, std::uint64_t seed,
                          std::size_t random_functions) {
  Prop31Report report;
  report.measure_preserving = sys.is_measure_preserving(tol);

  bool invariant = true;
  for (std::size_t i = 0; i < sys.size() && invariant; ++i) {
    const ClassicalFunction chi = indicator(sys, {i});
    invariant = std::abs(integrate(sys, koopman(sys, chi)) - integrate(sys, chi)) <= tol;
  }
  Rng rng(seed);
  for (std::size_t r = 0; r < random_functions && invariant; ++r) {
    ClassicalFunction g(sys.size());
    for (auto& value : g) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      value = Complex(re, im);
    }
    invariant = std::abs(integrate(sys, koopman(sys, g)) - integrate(sys, g)) <= tol;
  }
  report.functional_invariant = invariant;
  report.equivalent = report.measure_preserving == report.functional_invariant;
  return report;
}

ClassicalRecurrence classical_recurrence(const ClassicalSystem& sys, const PointSet& s,
                                         std::size_t n_max) {
  if (!sys.is_measure_preserving()) {
    throw Error(ErrorCode::NotMeasurePreserving, "mu(T^{-1}{i}) != mu_i for some point");
  }
  const std::vector<bool> in = sys.mask(s);
  if (!(sys.measure(s) > 0.0)) throw Error(ErrorCode::NullSet, "mu(S) = 0");

  ClassicalRecurrence out;
  out.overlaps.reserve(n_max);
  std::vector<std::size_t> position(sys.size());
  std::iota(position.begin(), position.end(), std::size_t{0});
  for (std::size_t n = 1; n <= n_max; ++n) {
    double overlap = 0.0;
    for (std::size_t i = 0; i < sys.size(); ++i) {
      position[i] = sys.map()[position[i]];
      if (in[i] && in[position[i]]) overlap += sys.weights()[i];
    }
    out.overlaps.push_back(overlap);
    if (!out.first_n && overlap > 0.0) out.first_n = n;
  }
  return out;
}

AlgebraElement DiagonalEmbedding::indicator(const PointSet& s) const {
  std::vector<bool> in(point_count, false);
  for (auto i : s) {
    if (i >= point_count) {
      throw Error(ErrorCode::InvalidArgument, "point " + std::to_string(i) + " out of range");
    }
    in[i] = true;
  }
  AlgebraElement out = algebra.zero();
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (in[support[k]]) out.block(k)(0, 0) = 1.0;
  }
  return out;
}

AlgebraElement DiagonalEmbedding::function(std::span<const Complex> g) const {
  AlgebraElement out = algebra.zero();
  for (std::size_t k = 0; k < support.size(); ++k) out.block(k)(0, 0) = g[support.at(k)];
  return out;
}

DiagonalEmbedding embed_diagonal(const ClassicalSystem& sys) {
  std::vector<std::size_t> support;
  std::vector<std::size_t> block_of(sys.size(), sys.size());
  std::vector<double> weights;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (sys.weights()[i] > 0.0) {
      block_of[i] = support.size();
      support.push_back(i);
      weights.push_back(sys.weights()[i]);
    }
  }
  std::vector<std::size_t> block_map;
  block_map.reserve(support.size());
  for (auto i : support) {
    const std::size_t target = block_of[sys.map()[i]];
    if (target == sys.size()) {
      throw Error(ErrorCode::InvalidArgument, "map sends point " + std::to_string(i) +
                                                  " of positive weight onto a null point");
    }
    block_map.push_back(target);
  }
  // Weights already sum to 1 within tolerance; the BlockAlgebra check uses
  // the same bound, and dropped points contribute exactly zero.
  BlockAlgebra alg = BlockAlgebra::abelian(std::move(weights));
  Endomorphism tau(alg, std::move(block_map), alg.identity());
  LinearFunctional state = LinearFunctional::trace(alg);
  return DiagonalEmbedding{std::move(alg), std::move(tau), std::move(state), std::move(support),
                           sys.size()};
}

}  // namespace vnrecur
