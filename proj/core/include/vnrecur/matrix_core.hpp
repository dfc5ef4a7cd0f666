#pragma once

// Dense complex linear algebra at desk scale (a few dozen rows at most).

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace vnrecur {

using Complex = std::complex<double>;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const Complex> diag);
  static ComplexMatrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  Complex trace() const;
  double frobenius_norm() const;
  // Largest singular value.
  double operator_norm() const;
  bool all_finite() const;

  std::vector<Complex> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const Complex> values);

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scalar);

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs);
ComplexMatrix operator*(Complex scalar, ComplexMatrix m);
ComplexMatrix operator*(ComplexMatrix m, Complex scalar);
std::vector<Complex> operator*(const ComplexMatrix& m, std::span<const Complex> v);

// [A, B] = AB - BA
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);

// Conjugate-linear in the first argument.
Complex inner_product(std::span<const Complex> x, std::span<const Complex> y);
double vector_norm(std::span<const Complex> x);

// ||A - A*||_F
double hermiticity_defect(const ComplexMatrix& a);

struct EigDecomposition {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix vectors;            // orthonormal eigenvectors as columns
};

struct EigOptions {
  // Reconstruction tolerance the caller expects; used only for the
  // hermiticity gate, which scales it by (1 + ||H||_F).
  double hermiticity_tol = 1e-10;
  int max_sweeps = 100;
  // Sweeps stop once the off-diagonal Frobenius norm drops below this
  // fraction of ||H||_F.
  double off_diagonal_threshold = 1e-13;
};

// Cyclic Jacobi eigensolver for Hermitian matrices.
// Throws NotSquare, NotHermitian, NoConvergence.
EigDecomposition hermitian_eig(const ComplexMatrix& h, const EigOptions& options = {});

// e^{-iHt} built from the eigendecomposition of H.
ComplexMatrix unitary_exp(const ComplexMatrix& h, double t);
ComplexMatrix unitary_exp(const EigDecomposition& eig, double t);

struct Interval {
  double lo;
  double hi;
};

// Eigenvalues within [lo - pad, hi + pad] count as members of the interval.
inline constexpr double kSpectralMembershipPad = 1e-12;

// Sum of the eigenvector dyads whose eigenvalue lies in `s`.
ComplexMatrix spectral_projection(const ComplexMatrix& a, Interval s,
                                  double pad = kSpectralMembershipPad);

struct SingularDecomposition {
  std::vector<double> singular_values;  // descending
  ComplexMatrix right_vectors;          // columns pair with singular_values
};

// One-sided (Hestenes) Jacobi. Small singular values are resolved to
// absolute accuracy ~ eps * ||A||, which the kernel computations rely on.
SingularDecomposition singular_decomposition(const ComplexMatrix& a);

// Orthonormal basis (as columns) of {v : ||Av|| <= tol}; may have zero columns.
ComplexMatrix null_space(const ComplexMatrix& a, double tol);

}  // namespace vnrecur
