#pragma once

// GNS representation of a state on a block algebra, the contraction induced
// by a sub-invariant endomorphism, and its mean-ergodic projection.
//
// Coordinates: the algebra is spanned by its matrix units E_a (see
// BlockAlgebra::coordinates). With Gram matrix G_ab = phi(E_a* E_b) = W L W*
// and the d eigenvalues above the null threshold kept,
//   iota(A)   = L_d^{1/2} W_d* a           (basis_map, d x N)
//   pi(A)     = basis_map * Left(A) * R    (R = W_d L_d^{-1/2}, N x d)
//   tau_bar   = basis_map * Tau * R
// where Left(A) and Tau are the N x N coordinate matrices of B -> AB and of
// tau. At finite dimension iota is onto, so no completion step is needed.

#include <cstdint>
#include <optional>
#include <vector>

#include "vnrecur/algebra.hpp"
#include "vnrecur/dynamics.hpp"
#include "vnrecur/errors.hpp"
#include "vnrecur/matrix_core.hpp"

namespace vnrecur {

struct GnsOptions {
  // Gram eigenvalues at or below null_tol * max eigenvalue span the null space.
  double null_tol = 1e-12;
  // Sampled sub-invariance phi(tau(A*A)) <= phi(A*A) + tol.
  double sub_invariance_tol = 1e-10;
  std::size_t sub_invariance_samples = 32;
  std::uint64_t seed = 0;
  // ||basis_map * Tau * null_basis||_F above this means tau does not
  // respect the quotient.
  double leak_tol = 1e-8;
};

class GnsSpace {
 public:
  std::size_t dim() const noexcept { return basis_map_.rows(); }
  const BlockAlgebra& algebra() const noexcept { return state_.algebra(); }
  const LinearFunctional& state() const noexcept { return state_; }
  const ComplexMatrix& basis_map() const noexcept { return basis_map_; }
  const ComplexMatrix& gram_root() const noexcept { return gram_root_; }
  const std::vector<double>& gram_spectrum() const noexcept { return gram_spectrum_; }
  // Omega = iota(1)
  const std::vector<Complex>& omega() const noexcept { return omega_; }

  std::vector<Complex> embed(const AlgebraElement& a) const;
  ComplexMatrix represent(const AlgebraElement& a) const;

  bool has_dynamics() const noexcept { return tau_bar_.has_value(); }
  // Throws InvalidArgument when no endomorphism is attached.
  const ComplexMatrix& tau_bar() const;
  const Endomorphism& endomorphism() const;

 private:
  friend GnsSpace gns_construct(const LinearFunctional& phi, const GnsOptions& options);
  friend GnsSpace extend_endomorphism(GnsSpace space, const Endomorphism& tau,
                                      const GnsOptions& options);

  explicit GnsSpace(LinearFunctional state) : state_(std::move(state)) {}

  LinearFunctional state_;
  ComplexMatrix basis_map_;
  ComplexMatrix gram_root_;
  ComplexMatrix null_basis_;  // N x (N - d), orthonormal
  std::vector<double> gram_spectrum_;
  std::vector<Complex> omega_;
  std::optional<ComplexMatrix> tau_bar_;
  std::optional<Endomorphism> endomorphism_;
};

// Throws NotAState when phi(1) != 1 or the Gram matrix has a negative
// eigenvalue beyond rounding.
GnsSpace gns_construct(const LinearFunctional& phi, const GnsOptions& options = {});
GnsSpace gns_construct(const BlockAlgebra& alg, const LinearFunctional& phi,
                       const GnsOptions& options = {});

// Throws SubInvarianceViolated (including tau(1) != 1 and ||tau_bar|| > 1)
// and NullSpaceLeak.
GnsSpace extend_endomorphism(GnsSpace space, const Endomorphism& tau,
                             const GnsOptions& options = {});

struct GnsVerification {
  double max_inner_product_error = 0.0;  // |<iota(E_a), iota(E_b)> - phi(E_a* E_b)|
  double max_expectation_error = 0.0;    // |<Omega, pi(E_a) Omega> - phi(E_a)|
  double max_representation_error = 0.0; // ||pi(E_a) iota(E_b) - iota(E_a E_b)||
  double tau_bar_norm = 0.0;             // 0 when no dynamics attached
  double max_intertwining_error = 0.0;   // ||tau_bar iota(E_a) - iota(tau(E_a))||
  double omega_fixed_error = 0.0;        // ||tau_bar Omega - Omega||
};

GnsVerification verify_gns(const GnsSpace& space);

struct ErgodicProjection {
  ComplexMatrix q;                // projection onto {v : tau_bar v = v}
  std::size_t fixed_dim = 0;
  std::size_t n = 0;              // Cesaro length reaching the target
  double target = 0.0;            // epsilon / (||x|| + 1)
  double achieved_error = 0.0;    // ||(1/n) sum_{k<n} tau_bar^k x - Qx||
};

class NMaxExceededError : public Error {
 public:
  NMaxExceededError(const std::string& message, double achieved)
      : Error(ErrorCode::NMaxExceeded, message), achieved_(achieved) {}
  double achieved_error() const noexcept { return achieved_; }

 private:
  double achieved_;
};

inline constexpr double kFixTol = 1e-9;

// Q from the kernel of (tau_bar - I) (singular values <= fix_tol), then the
// least n <= n_max whose Cesaro average of x = iota(P) is within
// epsilon / (||x|| + 1) of Qx. Throws NMaxExceededError.
ErgodicProjection ergodic_projection(const GnsSpace& space, const AlgebraElement& p,
                                     double epsilon, std::size_t n_max = 1'000'000,
                                     double fix_tol = kFixTol);

struct KhintchineBoundReport {
  double phi_p_sq = 0.0;
  double xqx = 0.0;                  // <x, Qx>
  double max_transfer_error = 0.0;   // |<x, tau_bar^k x> - phi(P tau^k(P))|, k <= 20
  bool ok = false;
};

KhintchineBoundReport khintchine_bound_check(const GnsSpace& space,
                                             const ErgodicProjection& projection,
                                             const AlgebraElement& p,
                                             std::size_t transfer_steps = 20);

}  // namespace vnrecur
