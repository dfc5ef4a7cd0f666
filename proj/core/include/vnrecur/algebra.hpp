#pragma once

// Finite-dimensional von Neumann algebras as direct sums of full matrix
// blocks M_{n_1} + ... + M_{n_K}, with the weighted normalized trace
//   tr(A) = sum_k w_k Tr(A_k) / n_k,   sum_k w_k = 1.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vnrecur/matrix_core.hpp"
#include "vnrecur/random.hpp"

namespace vnrecur {

inline constexpr double kWeightSumTol = 1e-12;
inline constexpr double kProjectionTol = 1e-10;
inline constexpr double kLudersFloor = 1e-12;

class AlgebraElement;

class BlockAlgebra {
 public:
  // Weights default to n_k^2 / sum_j n_j^2, the restriction of the
  // maximally mixed state on the ambient space.
  explicit BlockAlgebra(std::vector<std::size_t> dims);
  BlockAlgebra(std::vector<std::size_t> dims, std::vector<double> weights);

  static BlockAlgebra factor(std::size_t n) { return BlockAlgebra({n}); }
  static BlockAlgebra abelian(std::vector<double> weights);

  std::size_t block_count() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t k) const { return dims_.at(k); }
  double weight(std::size_t k) const { return weights_.at(k); }
  std::span<const std::size_t> dims() const noexcept { return dims_; }
  std::span<const double> weights() const noexcept { return weights_; }
  bool is_factor() const noexcept { return dims_.size() == 1; }
  bool is_abelian() const noexcept;

  // Dimension as a complex vector space, sum_k n_k^2.
  std::size_t linear_dimension() const noexcept;

  AlgebraElement identity() const;
  AlgebraElement zero() const;
  AlgebraElement random_element(Rng& rng) const;
  AlgebraElement random_hermitian(Rng& rng) const;
  AlgebraElement random_unitary(Rng& rng) const;

  // Coordinates in the matrix-unit basis {E^(k)_ij}, ordered by block,
  // then row, then column.
  std::vector<Complex> coordinates(const AlgebraElement& a) const;
  AlgebraElement from_coordinates(std::span<const Complex> coords) const;
  AlgebraElement matrix_unit(std::size_t index) const;

  bool contains(const AlgebraElement& a) const noexcept;
  // Throws ShapeMismatch naming the offending block.
  void require_contains(const AlgebraElement& a) const;

  friend bool operator==(const BlockAlgebra&, const BlockAlgebra&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> weights_;
};

class AlgebraElement {
 public:
  AlgebraElement() = default;
  explicit AlgebraElement(std::vector<ComplexMatrix> blocks);

  std::size_t block_count() const noexcept { return blocks_.size(); }
  const ComplexMatrix& block(std::size_t k) const { return blocks_.at(k); }
  ComplexMatrix& block(std::size_t k) { return blocks_.at(k); }
  std::span<const ComplexMatrix> blocks() const noexcept { return blocks_; }

  AlgebraElement adjoint() const;
  // sqrt(sum_k ||A_k||_F^2), unweighted.
  double frobenius_norm() const;
  // max_k ||A_k||_op
  double operator_norm() const;

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement& operator*=(Complex scalar);

  friend bool operator==(const AlgebraElement&, const AlgebraElement&) = default;

 private:
  std::vector<ComplexMatrix> blocks_;
};

AlgebraElement operator+(AlgebraElement lhs, const AlgebraElement& rhs);
AlgebraElement operator-(AlgebraElement lhs, const AlgebraElement& rhs);
AlgebraElement operator*(const AlgebraElement& lhs, const AlgebraElement& rhs);
AlgebraElement operator*(Complex scalar, AlgebraElement a);

// Blockwise maximum of ||A_k - A_k*||_F.
double hermiticity_defect(const AlgebraElement& a);

// Element of the center: sum_k c_k 1_{n_k}.
struct CenterElement {
  std::vector<Complex> scalars;

  AlgebraElement to_element(const BlockAlgebra& alg) const;
};

enum class FunctionalKind { Trace, VectorState, DensityState };

// phi(A) = tr(rho A) for a positive density rho with tr(rho) = 1; the
// trace itself is the case rho = 1.
class LinearFunctional {
 public:
  static LinearFunctional trace(const BlockAlgebra& alg);
  // Throws NotAState unless rho is Hermitian, positive and tr(rho) = 1
  // within `tol`.
  static LinearFunctional density_state(const BlockAlgebra& alg, AlgebraElement rho,
                                        double tol = 1e-10);
  // Pure state of the vector psi sitting in block `block`.
  static LinearFunctional vector_state(const BlockAlgebra& alg, std::size_t block,
                                       std::span<const Complex> psi);

  Complex operator()(const AlgebraElement& a) const;

  FunctionalKind kind() const noexcept { return kind_; }
  const BlockAlgebra& algebra() const noexcept { return algebra_; }
  const AlgebraElement& density() const noexcept { return density_; }
  // Smallest eigenvalue of the density over all blocks.
  double min_density_eigenvalue() const;
  bool is_faithful(double tol = 1e-12) const { return min_density_eigenvalue() > tol; }

 private:
  LinearFunctional(BlockAlgebra alg, FunctionalKind kind, AlgebraElement density);

  BlockAlgebra algebra_;
  FunctionalKind kind_;
  AlgebraElement density_;
};

Complex trace(const BlockAlgebra& alg, const AlgebraElement& a);
CenterElement center_valued_trace(const BlockAlgebra& alg, const AlgebraElement& a);

bool is_projection(const AlgebraElement& a, double tol = kProjectionTol);
// Max over blocks of ||A^2 - A||_F.
double idempotency_defect(const AlgebraElement& a);

struct AdditivityReport {
  bool pairwise_ok = false;  // phi(P_k P_l P_k) <= tol for all k < l
  double sum = 0.0;          // sum_k phi(P_k)
  // Empty when the pairwise hypothesis fails, so additivity says nothing.
  std::optional<bool> additive_ok;
};

// Throws NotProjection naming the first failing index.
AdditivityReport check_additive(const LinearFunctional& phi,
                                std::span<const AlgebraElement> projections, double tol);

// For faithful phi, phi(PQP) = phi((QP)*(QP)) ~ 0 forces QP ~ 0. Checks
// ||QP||_F and ||PQ||_F against sqrt(tol) scaled by the faithfulness
// constant of phi. Throws HypothesisFailed when phi(PQP) > tol and
// NotFaithful when phi has a null direction.
bool check_faithful_implies_orthogonal(const LinearFunctional& phi, const AlgebraElement& p,
                                       const AlgebraElement& q, double tol);

bool check_cstar_trace(const LinearFunctional& phi, std::size_t sample_count, std::uint64_t seed,
                       double tol);

// omega'(A) = omega(PAP) / omega(P). Throws ZeroProbability when
// omega(P) <= floor and NotProjection when P is not a projection.
LinearFunctional luders_update(const LinearFunctional& omega, const AlgebraElement& p,
                               double floor = kLudersFloor);

LinearFunctional tracial_state(const BlockAlgebra& alg);

}  // namespace vnrecur
