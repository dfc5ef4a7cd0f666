#pragma once

// Finite measure spaces with a self-map, and their embedding as abelian
// block algebras (one 1x1 block per point of positive weight).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vnrecur/algebra.hpp"
#include "vnrecur/dynamics.hpp"

namespace vnrecur {

using ClassicalFunction = std::vector<Complex>;
// Point indices; duplicates are ignored.
using PointSet = std::vector<std::size_t>;

class ClassicalSystem {
 public:
  // weights: mu_i >= 0 with sum 1 (within 1e-12); map: T[i] in [0, m).
  // Throws InvalidArgument otherwise.
  ClassicalSystem(std::vector<double> weights, std::vector<std::size_t> map);

  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const std::size_t> map() const noexcept { return map_; }

  // mu(S), summed in increasing point order.
  double measure(const PointSet& s) const;
  // mu(T^{-1}{i}) for each i.
  std::vector<double> preimage_weights() const;
  bool is_measure_preserving(double tol = kWeightSumTol) const;
  // T^n(i)
  std::size_t orbit_point(std::size_t i, std::size_t n) const;
  // Membership mask of S; throws InvalidArgument on out-of-range points.
  std::vector<bool> mask(const PointSet& s) const;

 private:
  std::vector<double> weights_;
  std::vector<std::size_t> map_;
};

ClassicalFunction indicator(const ClassicalSystem& sys, const PointSet& s);

// (g o T)[i] = g[T[i]]. Throws LengthMismatch.
ClassicalFunction koopman(const ClassicalSystem& sys, std::span<const Complex> g);

// integral of g against mu
Complex integrate(const ClassicalSystem& sys, std::span<const Complex> g);

struct Prop31Report {
  bool measure_preserving = false;
  bool functional_invariant = false;
  bool equivalent = false;
};

// Compares mu(T^{-1}{i}) = mu_i against |phi(g o T) - phi(g)| <= tol over
// the indicator basis and `random_functions` seeded random g.
Prop31Report check_prop31(const ClassicalSystem& sys, double tol, std::uint64_t seed = 0,
                          std::size_t random_functions = 100);

struct ClassicalRecurrence {
  // Least n >= 1 with overlaps[n-1] > 0.
  std::optional<std::size_t> first_n;
  // overlaps[n-1] = mu(S and T^{-n}(S)) for n = 1..n_max
  std::vector<double> overlaps;
};

// Throws NotMeasurePreserving and NullSet (mu(S) = 0).
ClassicalRecurrence classical_recurrence(const ClassicalSystem& sys, const PointSet& s,
                                         std::size_t n_max);

// The abelian algebra over the support of mu, the Koopman endomorphism and
// the integration state (which is the algebra's trace).
struct DiagonalEmbedding {
  BlockAlgebra algebra;
  Endomorphism koopman;
  LinearFunctional state;
  // support[k] is the point behind block k.
  std::vector<std::size_t> support;
  std::size_t point_count = 0;

  // chi_S restricted to the support.
  AlgebraElement indicator(const PointSet& s) const;
  AlgebraElement function(std::span<const Complex> g) const;
};

// Zero-weight points are dropped. Throws InvalidArgument if T maps a point
// of positive weight onto a null point, which a measure-preserving T never
// does.
DiagonalEmbedding embed_diagonal(const ClassicalSystem& sys);

}  // namespace vnrecur
