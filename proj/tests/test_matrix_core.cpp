#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "vnrecur/errors.hpp"
#include "vnrecur/matrix_core.hpp"
#include "vnrecur/random.hpp"

using namespace vnrecur;

namespace {

double residual(const ComplexMatrix& h, const EigDecomposition& eig) {
  const ComplexMatrix d = ComplexMatrix::diagonal(std::span<const double>(eig.eigenvalues));
  return (eig.vectors * d * eig.vectors.adjoint() - h).frobenius_norm();
}

double orthonormality_defect(const ComplexMatrix& v) {
  return (v.adjoint() * v - ComplexMatrix::identity(v.cols())).frobenius_norm();
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("hermitian_eig on a diagonal matrix sorts and swaps columns") {
  const ComplexMatrix h{{3.0, 0.0}, {0.0, 1.0}};
  const EigDecomposition eig = hermitian_eig(h);
  CHECK(eig.eigenvalues[0] == 1.0);
  CHECK(eig.eigenvalues[1] == 3.0);
  const ComplexMatrix swapped{{0.0, 1.0}, {1.0, 0.0}};
  CHECK(eig.vectors == swapped);
}

TEST_CASE("hermitian_eig matches the characteristic polynomial of 2x2 matrices") {
  const auto [lo, hi] = oracle::hermitian_2x2_eigenvalues(0.0, 1.0, 0.0);
  const EigDecomposition eig = hermitian_eig(ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}});
  CHECK(eig.eigenvalues[0] == doctest::Approx(lo).epsilon(1e-14));
  CHECK(eig.eigenvalues[1] == doctest::Approx(hi).epsilon(1e-14));
  CHECK(lo == -1.0);
  CHECK(hi == 1.0);

  const Complex b(0.3, -1.7);
  const auto [lo2, hi2] = oracle::hermitian_2x2_eigenvalues(2.0, b, -0.5);
  const EigDecomposition eig2 = hermitian_eig(ComplexMatrix{{2.0, b}, {std::conj(b), -0.5}});
  CHECK(std::abs(eig2.eigenvalues[0] - lo2) < 1e-13);
  CHECK(std::abs(eig2.eigenvalues[1] - hi2) < 1e-13);
}

TEST_CASE("hermitian_eig reconstructs a random 6x6 Hermitian matrix") {
  Rng rng(6);
  const ComplexMatrix h = random_hermitian(6, rng);
  const EigDecomposition eig = hermitian_eig(h);
  CHECK(residual(h, eig) <= 1e-10 * (1.0 + h.frobenius_norm()));
  CHECK(orthonormality_defect(eig.vectors) <= 1e-10);
}

TEST_CASE("hermitian_eig reconstruction over 1000 seeded matrices of dims 2..16") {
  Rng rng(20240601);
  double worst_residual = 0.0;
  double worst_orthonormality = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 15);
    const ComplexMatrix h = random_hermitian(n, rng);
    const EigDecomposition eig = hermitian_eig(h);
    worst_residual = std::max(worst_residual, residual(h, eig) / (1.0 + h.frobenius_norm()));
    worst_orthonormality = std::max(worst_orthonormality, orthonormality_defect(eig.vectors));
    for (std::size_t k = 1; k < n; ++k) REQUIRE(eig.eigenvalues[k - 1] <= eig.eigenvalues[k]);
  }
  CHECK(worst_residual <= 1e-10);
  CHECK(worst_orthonormality <= 1e-10);
}

TEST_CASE("hermitian_eig is deterministic") {
  Rng rng(3);
  const ComplexMatrix h = random_hermitian(9, rng);
  const EigDecomposition a = hermitian_eig(h);
  const EigDecomposition b = hermitian_eig(h);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.vectors == b.vectors);
}

TEST_CASE("hermitian_eig handles degenerate and zero spectra") {
  const EigDecomposition zero = hermitian_eig(ComplexMatrix::zeros(3, 3));
  CHECK(zero.eigenvalues == std::vector<double>{0.0, 0.0, 0.0});
  CHECK(zero.vectors == ComplexMatrix::identity(3));

  Rng rng(11);
  const ComplexMatrix u = random_unitary(4, rng);
  const std::vector<double> diag{2.0, 2.0, -1.0, -1.0};
  const ComplexMatrix h = u * ComplexMatrix::diagonal(std::span<const double>(diag)) * u.adjoint();
  const EigDecomposition eig = hermitian_eig(h);
  CHECK(std::abs(eig.eigenvalues[0] + 1.0) < 1e-12);
  CHECK(std::abs(eig.eigenvalues[3] - 2.0) < 1e-12);
  CHECK(residual(h, eig) < 1e-12);
}

TEST_CASE("hermitian_eig error paths") {
  CHECK(code_of([] { hermitian_eig(ComplexMatrix(2, 3)); }) == ErrorCode::NotSquare);
  CHECK(code_of([] { hermitian_eig(ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}); }) ==
        ErrorCode::NotHermitian);
  EigOptions starved;
  starved.max_sweeps = 0;
  Rng rng(1);
  const ComplexMatrix h = random_hermitian(5, rng);
  CHECK(code_of([&] { hermitian_eig(h, starved); }) == ErrorCode::NoConvergence);
}

TEST_CASE("unitary_exp closed forms") {
  const ComplexMatrix h{{1.0, 0.0}, {0.0, -1.0}};
  CHECK(unitary_exp(h, 0.0) == ComplexMatrix::identity(2));

  const ComplexMatrix at_pi = unitary_exp(h, std::numbers::pi);
  CHECK((at_pi - ComplexMatrix{{-1.0, 0.0}, {0.0, -1.0}}).frobenius_norm() < 1e-14);

  const ComplexMatrix at_half_pi = unitary_exp(h, std::numbers::pi / 2);
  const Complex i(0.0, 1.0);
  CHECK((at_half_pi - ComplexMatrix{{-i, 0.0}, {0.0, i}}).frobenius_norm() < 1e-14);

  Rng rng(2);
  const ComplexMatrix g = random_hermitian(5, rng);
  CHECK((unitary_exp(g, 0.0) - ComplexMatrix::identity(5)).frobenius_norm() == 0.0);
}

TEST_CASE("unitary_exp is unitary and satisfies the group law") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix h = random_hermitian(2 + trial % 6, rng);
    const double s = 200.0 * uniform01(rng) - 100.0;
    const double t = 200.0 * uniform01(rng) - 100.0;
    const ComplexMatrix us = unitary_exp(h, s);
    const ComplexMatrix ut = unitary_exp(h, t);
    CHECK(orthonormality_defect(ut) <= 1e-10);
    CHECK((us * ut - unitary_exp(h, s + t)).frobenius_norm() <= 1e-9);
  }
}

TEST_CASE("spectral_projection selects eigenvalues in the interval") {
  const ComplexMatrix a{{1.0, 0.0}, {0.0, -1.0}};
  CHECK((spectral_projection(a, {0.0, 2.0}) - ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}})
            .frobenius_norm() < 1e-15);
  CHECK((spectral_projection(a, {-2.0, 2.0}) - ComplexMatrix::identity(2)).frobenius_norm() <
        1e-15);

  const ComplexMatrix x{{0.0, 1.0}, {1.0, 0.0}};
  const ComplexMatrix plus = spectral_projection(x, {0.5, 1.5});
  CHECK((plus - ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}}).frobenius_norm() < 1e-14);

  // Interval endpoints exactly at an eigenvalue are included via the pad.
  CHECK((spectral_projection(a, {1.0, 1.0}) - ComplexMatrix{{1.0, 0.0}, {0.0, 0.0}})
            .frobenius_norm() < 1e-15);
  CHECK(code_of([&] { spectral_projection(a, {1.0, 0.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("spectral projections are projections with the right rank") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const ComplexMatrix a = random_hermitian(n, rng);
    const Interval s{-0.5, 1.0};
    const ComplexMatrix p = spectral_projection(a, s);
    CHECK(hermiticity_defect(p) <= 1e-10);
    CHECK((p * p - p).frobenius_norm() <= 1e-10);
    const EigDecomposition eig = hermitian_eig(a);
    const auto count = std::count_if(eig.eigenvalues.begin(), eig.eigenvalues.end(),
                                     [&](double l) { return l >= s.lo && l <= s.hi; });
    CHECK(std::abs(p.trace().real() - static_cast<double>(count)) < 1e-10);

    const ComplexMatrix whole = spectral_projection(a, {-1e6, 1e6});
    CHECK((whole - ComplexMatrix::identity(n)).frobenius_norm() <= 1e-10);
  }
}

TEST_CASE("spectral projector does not depend on the basis inside an eigenspace") {
  Rng rng(5);
  const std::vector<double> diag{1.0, 1.0, 1.0, 4.0};
  const ComplexMatrix d = ComplexMatrix::diagonal(std::span<const double>(diag));
  const ComplexMatrix u1 = random_unitary(4, rng);
  const ComplexMatrix u2 = random_unitary(4, rng);
  // Rotations that fix the 4-eigenvector but mix the degenerate eigenspace.
  ComplexMatrix mixer = ComplexMatrix::identity(4);
  const ComplexMatrix w = random_unitary(3, rng);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) mixer(r, c) = w(r, c);
  }
  const ComplexMatrix a = u1 * d * u1.adjoint();
  const ComplexMatrix b = (u1 * mixer) * d * (u1 * mixer).adjoint();
  const ComplexMatrix pa = spectral_projection(a, {0.0, 2.0});
  const ComplexMatrix pb = spectral_projection(b, {0.0, 2.0});
  CHECK((pa - pb).frobenius_norm() < 1e-12);
  (void)u2;
}

TEST_CASE("singular_decomposition and null_space") {
  const ComplexMatrix shift{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  const ComplexMatrix m = shift - ComplexMatrix::identity(3);
  const ComplexMatrix kernel = null_space(m, 1e-9);
  REQUIRE(kernel.cols() == 1);
  // The fixed vector of a cyclic shift is the constant vector.
  const std::vector<Complex> v = kernel.column(0);
  CHECK(std::abs(std::abs(v[0]) - 1.0 / std::sqrt(3.0)) < 1e-14);
  CHECK(std::abs(v[0] - v[1]) < 1e-14);
  CHECK(std::abs(v[1] - v[2]) < 1e-14);
  CHECK(vector_norm(m * std::span<const Complex>(v)) < 1e-15);

  Rng rng(9);
  const ComplexMatrix u = random_unitary(6, rng);
  CHECK(std::abs(u.operator_norm() - 1.0) < 1e-13);
  const ComplexMatrix g = random_matrix(5, 5, rng);
  const SingularDecomposition svd = singular_decomposition(g);
  double sum_sq = 0.0;
  for (double s : svd.singular_values) sum_sq += s * s;
  CHECK(std::abs(std::sqrt(sum_sq) - g.frobenius_norm()) < 1e-12);
  for (std::size_t k = 1; k < svd.singular_values.size(); ++k) {
    CHECK(svd.singular_values[k - 1] >= svd.singular_values[k]);
  }
}
