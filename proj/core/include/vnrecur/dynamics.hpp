#pragma once

// Time evolution on block algebras: Hamiltonian flows tau_t(A) = U_t* A U_t
// with U_t = e^{-iHt}, and discrete block-map endomorphisms.

#include <cstdint>
#include <span>
#include <vector>

#include "vnrecur/algebra.hpp"
#include "vnrecur/matrix_core.hpp"

namespace vnrecur {

class Endomorphism;

// A Hermitian Hamiltonian in the algebra itself, so e^{-iHt} stays in it.
class BoundedQuantumSystem {
 public:
  // Throws NotHermitian when some block has ||H_k - H_k*||_F > 1e-10 and
  // ShapeMismatch when H does not belong to the algebra.
  BoundedQuantumSystem(BlockAlgebra alg, AlgebraElement hamiltonian);

  const BlockAlgebra& algebra() const noexcept { return algebra_; }
  const AlgebraElement& hamiltonian() const noexcept { return hamiltonian_; }
  std::span<const EigDecomposition> spectra() const noexcept { return spectra_; }

  // U_t = e^{-iHt}, block by block.
  AlgebraElement propagator(double t) const;
  // The time-t map tau_t as a discrete endomorphism.
  Endomorphism step(double t) const;
  // ||H||_op = max_k max_j |lambda_{k,j}|
  double hamiltonian_norm() const;
  // True when every U_t block is a phase multiple of the identity, i.e.
  // tau_t is the identity map, within `tol` on the phase differences.
  bool is_period(double t, double tol = 1e-9) const;

 private:
  BlockAlgebra algebra_;
  AlgebraElement hamiltonian_;
  std::vector<EigDecomposition> spectra_;
};

AlgebraElement evolve(const BoundedQuantumSystem& sys, double t, const AlgebraElement& a);

struct LiouvilleReport {
  double max_deviation = 0.0;
  std::size_t evaluations = 0;
};

// max over seeded random A and the grid of |tr(tau_t(A)) - tr(A)|.
LiouvilleReport verify_liouville(const BoundedQuantumSystem& sys, std::size_t sample_count,
                                 std::span<const double> t_grid, std::uint64_t seed);

// tau(A)_k = U_k* A_{s(k)} U_k for a block map s with n_{s(k)} = n_k and a
// blockwise unitary U. Any such map is a unital *-homomorphism; it is an
// automorphism when s is a bijection. With one-dimensional blocks and U = 1
// this is exactly the Koopman operator g -> g o s.
class Endomorphism {
 public:
  // Throws InvalidArgument for an out-of-range or dimension-changing block
  // map and when U is not unitary within 1e-10.
  Endomorphism(BlockAlgebra alg, std::vector<std::size_t> block_map, AlgebraElement unitary);

  static Endomorphism identity(const BlockAlgebra& alg);
  static Endomorphism conjugation(const BlockAlgebra& alg, AlgebraElement unitary);
  // Permutation followed by conjugation; additionally requires the
  // permutation to be a bijection between blocks of equal weight.
  static Endomorphism block_permutation(const BlockAlgebra& alg,
                                        std::vector<std::size_t> permutation,
                                        AlgebraElement unitary);

  AlgebraElement operator()(const AlgebraElement& a) const;

  const BlockAlgebra& algebra() const noexcept { return algebra_; }
  std::span<const std::size_t> block_map() const noexcept { return block_map_; }
  const AlgebraElement& unitary() const noexcept { return unitary_; }

  bool is_automorphism() const;
  // sum_{k : s(k) = j} w_k = w_j for every block j.
  bool preserves_trace(double tol = 1e-12) const;

 private:
  BlockAlgebra algebra_;
  std::vector<std::size_t> block_map_;
  AlgebraElement unitary_;
};

// n-fold composition; n = 0 returns A.
AlgebraElement apply_endo(const Endomorphism& tau, const AlgebraElement& a, std::size_t n);

struct VonNeumannReport {
  double residual = 0.0;
};

// Central difference of rho(s) = tau_{-s}(rho) at s = t against i[rho(t), H].
VonNeumannReport von_neumann_check(const BoundedQuantumSystem& sys, const AlgebraElement& rho,
                                   double t, double h);

}  // namespace vnrecur
