#include "vnrecur/gns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vnrecur/random.hpp"

namespace vnrecur {

namespace {

// Columns are the coordinates of f(E_b) over the matrix-unit basis.
template <typename Map>
ComplexMatrix coordinate_matrix(const BlockAlgebra& alg, Map&& f) {
  const std::size_t n = alg.linear_dimension();
  ComplexMatrix out(n, n);
  for (std::size_t b = 0; b < n; ++b) out.set_column(b, alg.coordinates(f(alg.matrix_unit(b))));
  return out;
}

std::vector<Complex> difference(std::span<const Complex> a, std::span<const Complex> b) {
  std::vector<Complex> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace

std::vector<Complex> GnsSpace::embed(const AlgebraElement& a) const {
  return basis_map_ * std::span<const Complex>(algebra().coordinates(a));
}

ComplexMatrix GnsSpace::represent(const AlgebraElement& a) const {
  const BlockAlgebra& alg = algebra();
  alg.require_contains(a);
  const ComplexMatrix left = coordinate_matrix(alg, [&](const AlgebraElement& e) { return a * e; });
  return basis_map_ * left * gram_root_;
}

const ComplexMatrix& GnsSpace::tau_bar() const {
  if (!tau_bar_) throw Error(ErrorCode::InvalidArgument, "no endomorphism attached");
  return *tau_bar_;
}

const Endomorphism& GnsSpace::endomorphism() const {
  if (!endomorphism_) throw Error(ErrorCode::InvalidArgument, "no endomorphism attached");
  return *endomorphism_;
}

GnsSpace gns_construct(const LinearFunctional& phi, const GnsOptions& options) {
  const BlockAlgebra& alg = phi.algebra();
  const Complex unit = phi(alg.identity());
  if (std::abs(unit - 1.0) > 1e-10) {
    throw Error(ErrorCode::NotAState, "phi(1) = " + std::to_string(unit.real()));
  }

  const std::size_t n = alg.linear_dimension();
  std::vector<AlgebraElement> units;
  units.reserve(n);
  for (std::size_t a = 0; a < n; ++a) units.push_back(alg.matrix_unit(a));
  ComplexMatrix gram(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    const AlgebraElement left = units[a].adjoint();
    for (std::size_t b = 0; b < n; ++b) gram(a, b) = phi(left * units[b]);
  }

  const EigDecomposition eig = hermitian_eig(gram);
  const double largest = eig.eigenvalues.back();
  if (!(largest > 0.0) || eig.eigenvalues.front() < -1e-10 * largest) {
    throw Error(ErrorCode::NotAState, "Gram matrix has eigenvalue " +
                                          std::to_string(eig.eigenvalues.front()));
  }

  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;
  for (std::size_t k = 0; k < n; ++k) {
    (eig.eigenvalues[k] > options.null_tol * largest ? kept : dropped).push_back(k);
  }

  GnsSpace space(phi);
  const std::size_t d = kept.size();
  space.basis_map_ = ComplexMatrix(d, n);
  space.gram_root_ = ComplexMatrix(n, d);
  for (std::size_t j = 0; j < d; ++j) {
    const double lambda = eig.eigenvalues[kept[j]];
    const double root = std::sqrt(lambda);
    space.gram_spectrum_.push_back(lambda);
    for (std::size_t r = 0; r < n; ++r) {
      const Complex w = eig.vectors(r, kept[j]);
      space.basis_map_(j, r) = root * std::conj(w);
      space.gram_root_(r, j) = w / root;
    }
  }
  space.null_basis_ = ComplexMatrix(n, dropped.size());
  for (std::size_t j = 0; j < dropped.size(); ++j) {
    for (std::size_t r = 0; r < n; ++r) space.null_basis_(r, j) = eig.vectors(r, dropped[j]);
  }
  space.omega_ = space.embed(alg.identity());
  return space;
}

GnsSpace gns_construct(const BlockAlgebra& alg, const LinearFunctional& phi,
                       const GnsOptions& options) {
  if (!(alg == phi.algebra())) {
    throw Error(ErrorCode::ShapeMismatch, "functional belongs to a different algebra");
  }
  return gns_construct(phi, options);
}

GnsSpace extend_endomorphism(GnsSpace space, const Endomorphism& tau, const GnsOptions& options) {
  const BlockAlgebra& alg = space.algebra();
  if (!(tau.algebra() == alg)) {
    throw Error(ErrorCode::ShapeMismatch, "endomorphism belongs to a different algebra");
  }
  const LinearFunctional& phi = space.state();

  const double unit_defect = (tau(alg.identity()) - alg.identity()).frobenius_norm();
  if (unit_defect > options.sub_invariance_tol) {
    throw Error(ErrorCode::SubInvarianceViolated,
                "tau(1) != 1 (defect " + std::to_string(unit_defect) + ")");
  }
  auto check = [&](const AlgebraElement& a) {
    const AlgebraElement positive = a.adjoint() * a;
    const double before = phi(positive).real();
    const double after = phi(tau(positive)).real();
    if (after > before + options.sub_invariance_tol) {
      throw Error(ErrorCode::SubInvarianceViolated,
                  "phi(tau(A*A)) = " + std::to_string(after) + " > phi(A*A) = " +
                      std::to_string(before));
    }
  };
  for (std::size_t i = 0; i < alg.linear_dimension(); ++i) check(alg.matrix_unit(i));
  Rng rng(options.seed);
  for (std::size_t i = 0; i < options.sub_invariance_samples; ++i) check(alg.random_element(rng));

  const ComplexMatrix tau_coords = coordinate_matrix(alg, tau);
  if (space.null_basis_.cols() > 0) {
    const double leak = (space.basis_map_ * tau_coords * space.null_basis_).frobenius_norm();
    if (leak > options.leak_tol) {
      throw Error(ErrorCode::NullSpaceLeak,
                  "tau moves the null space by " + std::to_string(leak));
    }
  }
  ComplexMatrix tau_bar = space.basis_map_ * tau_coords * space.gram_root_;
  const double norm = tau_bar.operator_norm();
  if (norm > 1.0 + 1e-10) {
    throw Error(ErrorCode::SubInvarianceViolated, "||tau_bar|| = " + std::to_string(norm));
  }
  space.tau_bar_ = std::move(tau_bar);
  space.endomorphism_ = tau;
  return space;
}

GnsVerification verify_gns(const GnsSpace& space) {
  const BlockAlgebra& alg = space.algebra();
  const LinearFunctional& phi = space.state();
  const std::size_t n = alg.linear_dimension();
  std::vector<AlgebraElement> units;
  std::vector<std::vector<Complex>> images;
  for (std::size_t a = 0; a < n; ++a) {
    units.push_back(alg.matrix_unit(a));
    images.push_back(space.embed(units.back()));
  }

  GnsVerification out;
  for (std::size_t a = 0; a < n; ++a) {
    const AlgebraElement left = units[a].adjoint();
    const ComplexMatrix rep = space.represent(units[a]);
    for (std::size_t b = 0; b < n; ++b) {
      const Complex expected = phi(left * units[b]);
      out.max_inner_product_error = std::max(
          out.max_inner_product_error, std::abs(inner_product(images[a], images[b]) - expected));
      const std::vector<Complex> lhs = rep * std::span<const Complex>(images[b]);
      const std::vector<Complex> rhs = space.embed(units[a] * units[b]);
      out.max_representation_error =
          std::max(out.max_representation_error, vector_norm(difference(lhs, rhs)));
    }
    const std::vector<Complex> moved = rep * std::span<const Complex>(space.omega());
    out.max_expectation_error = std::max(
        out.max_expectation_error, std::abs(inner_product(space.omega(), moved) - phi(units[a])));
  }

  if (space.has_dynamics()) {
    const ComplexMatrix& tau_bar = space.tau_bar();
    const Endomorphism& tau = space.endomorphism();
    out.tau_bar_norm = tau_bar.operator_norm();
    for (std::size_t a = 0; a < n; ++a) {
      const std::vector<Complex> lhs = tau_bar * std::span<const Complex>(images[a]);
      const std::vector<Complex> rhs = space.embed(tau(units[a]));
      out.max_intertwining_error =
          std::max(out.max_intertwining_error, vector_norm(difference(lhs, rhs)));
    }
    out.omega_fixed_error =
        vector_norm(difference(tau_bar * std::span<const Complex>(space.omega()), space.omega()));
  }
  return out;
}

ErgodicProjection ergodic_projection(const GnsSpace& space, const AlgebraElement& p,
                                     double epsilon, std::size_t n_max, double fix_tol) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  const ComplexMatrix& tau_bar = space.tau_bar();
  const std::size_t d = space.dim();

  const ComplexMatrix fixed = null_space(tau_bar - ComplexMatrix::identity(d), fix_tol);
  ErgodicProjection out;
  out.fixed_dim = fixed.cols();
  out.q = fixed * fixed.adjoint();
  const double drift = (tau_bar * out.q - out.q).frobenius_norm();
  if (drift > 1e-9) {
    throw Error(ErrorCode::InvariantViolated,
                "||tau_bar Q - Q||_F = " + std::to_string(drift));
  }

  const std::vector<Complex> x = space.embed(p);
  const std::vector<Complex> qx = out.q * std::span<const Complex>(x);
  out.target = epsilon / (vector_norm(x) + 1.0);

  std::vector<Complex> orbit = x;
  std::vector<Complex> sum(d);
  std::vector<Complex> gap(d);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= n_max; ++n) {
    for (std::size_t i = 0; i < d; ++i) sum[i] += orbit[i];
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < d; ++i) gap[i] = sum[i] * inv - qx[i];
    const double error = vector_norm(gap);
    best = std::min(best, error);
    if (error <= out.target) {
      out.n = n;
      out.achieved_error = error;
      return out;
    }
    orbit = tau_bar * std::span<const Complex>(orbit);
  }
  throw NMaxExceededError("Cesaro average not within " + std::to_string(out.target) +
                              " after n_max = " + std::to_string(n_max) +
                              " (best " + std::to_string(best) + ")",
                          best);
}

KhintchineBoundReport khintchine_bound_check(const GnsSpace& space,
                                             const ErgodicProjection& projection,
                                             const AlgebraElement& p,
                                             std::size_t transfer_steps) {
  const LinearFunctional& phi = space.state();
  const Endomorphism& tau = space.endomorphism();
  const ComplexMatrix& tau_bar = space.tau_bar();
  const std::vector<Complex> x = space.embed(p);

  KhintchineBoundReport report;
  const double phi_p = phi(p).real();
  report.phi_p_sq = phi_p * phi_p;
  report.xqx = inner_product(x, projection.q * std::span<const Complex>(x)).real();

  std::vector<Complex> orbit = x;
  AlgebraElement moved = p;
  for (std::size_t k = 1; k <= transfer_steps; ++k) {
    orbit = tau_bar * std::span<const Complex>(orbit);
    moved = tau(moved);
    const Complex gns_side = inner_product(x, orbit);
    const Complex direct = phi(p * moved);
    report.max_transfer_error = std::max(report.max_transfer_error, std::abs(gns_side - direct));
  }
  report.ok = report.phi_p_sq <= report.xqx + 1e-9 && report.max_transfer_error <= 1e-9;
  return report;
}

}  // namespace vnrecur
