#include "vnrecur/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vnrecur/errors.hpp"

namespace vnrecur {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::string(op) + ": " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

// Applies the 2x2 unitary j = [[j_pp, j_pq], [j_qp, j_qq]] to columns p, q.
void rotate_columns(ComplexMatrix& m, std::size_t p, std::size_t q, Complex j_pp, Complex j_pq,
                    Complex j_qp, Complex j_qq) {
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const Complex mp = m(k, p);
    const Complex mq = m(k, q);
    m(k, p) = mp * j_pp + mq * j_qp;
    m(k, q) = mp * j_pq + mq * j_qq;
  }
}

// Left-multiplies rows p, q by the adjoint of the same 2x2 unitary.
void rotate_rows_adjoint(ComplexMatrix& m, std::size_t p, std::size_t q, Complex j_pp, Complex j_pq,
                         Complex j_qp, Complex j_qq) {
  for (std::size_t k = 0; k < m.cols(); ++k) {
    const Complex mp = m(p, k);
    const Complex mq = m(q, k);
    m(p, k) = std::conj(j_pp) * mp + std::conj(j_qp) * mq;
    m(q, k) = std::conj(j_pq) * mp + std::conj(j_qq) * mq;
  }
}

double off_diagonal_norm(const ComplexMatrix& a) {
  double sum = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (r != c) sum += std::norm(a(r, c));
    }
  }
  return std::sqrt(sum);
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::ShapeMismatch, "entry count " + std::to_string(data_.size()) +
                                              " does not match " + std::to_string(rows_) + "x" +
                                              std::to_string(cols_));
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "ragged initializer list");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  }
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  }
  return out;
}

Complex ComplexMatrix::trace() const {
  if (!is_square()) throw Error(ErrorCode::NotSquare, "trace of a non-square matrix");
  Complex sum = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) sum += (*this)(i, i);
  return sum;
}

double ComplexMatrix::frobenius_norm() const {
  double sum = 0.0;
  for (const auto& z : data_) sum += std::norm(z);
  return std::sqrt(sum);
}

double ComplexMatrix::operator_norm() const {
  if (data_.empty()) return 0.0;
  return singular_decomposition(*this).singular_values.front();
}

bool ComplexMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

std::vector<Complex> ComplexMatrix::column(std::size_t c) const {
  std::vector<Complex> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void ComplexMatrix::set_column(std::size_t c, std::span<const Complex> values) {
  if (values.size() != rows_) throw Error(ErrorCode::ShapeMismatch, "set_column length");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scalar) {
  for (auto& z : data_) z *= scalar;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
ComplexMatrix operator*(Complex scalar, ComplexMatrix m) { return m *= scalar; }
ComplexMatrix operator*(ComplexMatrix m, Complex scalar) { return m *= scalar; }

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "matrix product " + std::to_string(lhs.rows()) + "x" +
                                              std::to_string(lhs.cols()) + " * " +
                                              std::to_string(rhs.rows()) + "x" +
                                              std::to_string(rhs.cols()));
  }
  ComplexMatrix out(lhs.rows(), rhs.cols());
  for (std::size_t r = 0; r < lhs.rows(); ++r) {
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const Complex a = lhs(r, k);
      if (a == Complex{}) continue;
      for (std::size_t c = 0; c < rhs.cols(); ++c) out(r, c) += a * rhs(k, c);
    }
  }
  return out;
}

std::vector<Complex> operator*(const ComplexMatrix& m, std::span<const Complex> v) {
  if (m.cols() != v.size()) throw Error(ErrorCode::ShapeMismatch, "matrix-vector product");
  std::vector<Complex> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Complex sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) sum += m(r, c) * v[c];
    out[r] = sum;
  }
  return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

Complex inner_product(std::span<const Complex> x, std::span<const Complex> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "inner product lengths");
  Complex sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::conj(x[i]) * y[i];
  return sum;
}

double vector_norm(std::span<const Complex> x) {
  double sum = 0.0;
  for (const auto& z : x) sum += std::norm(z);
  return std::sqrt(sum);
}

double hermiticity_defect(const ComplexMatrix& a) {
  if (!a.is_square()) throw Error(ErrorCode::NotSquare, "hermiticity of a non-square matrix");
  double sum = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) sum += std::norm(a(r, c) - std::conj(a(c, r)));
  }
  return std::sqrt(sum);
}

EigDecomposition hermitian_eig(const ComplexMatrix& h, const EigOptions& options) {
  if (!h.is_square()) {
    throw Error(ErrorCode::NotSquare,
                "hermitian_eig on " + std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
  }
  const std::size_t n = h.rows();
  const double norm = h.frobenius_norm();
  const double defect = hermiticity_defect(h);
  if (!(defect <= options.hermiticity_tol * (1.0 + norm))) {
    throw Error(ErrorCode::NotHermitian, "||H - H*||_F = " + std::to_string(defect));
  }

  ComplexMatrix a = 0.5 * (h + h.adjoint());
  ComplexMatrix v = ComplexMatrix::identity(n);
  const double threshold = options.off_diagonal_threshold * norm;

  bool converged = off_diagonal_norm(a) <= threshold;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double g = std::abs(apq);
        if (g == 0.0) continue;
        // Reduce to the real symmetric pair [[app, g], [g, aqq]] via the
        // phase of apq, then apply the classical Jacobi rotation.
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * g);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        const Complex phase_conj = std::conj(apq / g);

        const Complex j_pp = c;
        const Complex j_pq = s;
        const Complex j_qp = -s * phase_conj;
        const Complex j_qq = c * phase_conj;
        rotate_columns(a, p, q, j_pp, j_pq, j_qp, j_qq);
        rotate_rows_adjoint(a, p, q, j_pp, j_pq, j_qp, j_qq);
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        rotate_columns(v, p, q, j_pp, j_pq, j_qp, j_qq);
      }
    }
    converged = off_diagonal_norm(a) <= threshold;
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence, "Jacobi sweep limit " +
                                              std::to_string(options.max_sweeps) + " exceeded");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a(i, i).real() < a(j, j).real();
  });

  EigDecomposition out;
  out.eigenvalues.resize(n);
  out.vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

ComplexMatrix unitary_exp(const EigDecomposition& eig, double t) {
  const std::size_t n = eig.eigenvalues.size();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex phase = std::polar(1.0, -eig.eigenvalues[k] * t);
    for (std::size_t r = 0; r < n; ++r) {
      const Complex vr = eig.vectors(r, k) * phase;
      for (std::size_t c = 0; c < n; ++c) out(r, c) += vr * std::conj(eig.vectors(c, k));
    }
  }
  return out;
}

ComplexMatrix unitary_exp(const ComplexMatrix& h, double t) {
  if (t == 0.0) {
    if (!h.is_square()) throw Error(ErrorCode::NotSquare, "unitary_exp of a non-square matrix");
    const double defect = hermiticity_defect(h);
    if (!(defect <= EigOptions{}.hermiticity_tol * (1.0 + h.frobenius_norm()))) {
      throw Error(ErrorCode::NotHermitian, "||H - H*||_F = " + std::to_string(defect));
    }
    return ComplexMatrix::identity(h.rows());
  }
  return unitary_exp(hermitian_eig(h), t);
}

ComplexMatrix spectral_projection(const ComplexMatrix& a, Interval s, double pad) {
  if (!(s.lo <= s.hi)) throw Error(ErrorCode::InvalidArgument, "interval with lo > hi");
  const EigDecomposition eig = hermitian_eig(a);
  const std::size_t n = a.rows();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double lambda = eig.eigenvalues[k];
    if (lambda < s.lo - pad || lambda > s.hi + pad) continue;
    for (std::size_t r = 0; r < n; ++r) {
      const Complex vr = eig.vectors(r, k);
      for (std::size_t c = 0; c < n; ++c) out(r, c) += vr * std::conj(eig.vectors(c, k));
    }
  }
  return out;
}

SingularDecomposition singular_decomposition(const ComplexMatrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  ComplexMatrix w = a;
  ComplexMatrix v = ComplexMatrix::identity(n);
  constexpr int kMaxSweeps = 100;
  constexpr double kOrthogonality = 1e-15;

  auto column_dot = [&](std::size_t p, std::size_t q) {
    Complex sum = 0.0;
    for (std::size_t r = 0; r < m; ++r) sum += std::conj(w(r, p)) * w(r, q);
    return sum;
  };

  bool rotated = true;
  int sweep = 0;
  for (; sweep < kMaxSweeps && rotated; ++sweep) {
    rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = column_dot(p, p).real();
        const double beta = column_dot(q, q).real();
        const Complex gamma = column_dot(p, q);
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= kOrthogonality * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::hypot(zeta, 1.0));
        const double c = 1.0 / std::hypot(t, 1.0);
        const double s = t * c;
        const Complex phase_conj = std::conj(gamma / g);
        rotate_columns(w, p, q, c, s, -s * phase_conj, c * phase_conj);
        rotate_columns(v, p, q, c, s, -s * phase_conj, c * phase_conj);
      }
    }
  }
  if (rotated) throw Error(ErrorCode::NoConvergence, "one-sided Jacobi sweep limit exceeded");

  std::vector<double> sigma(n);
  for (std::size_t k = 0; k < n; ++k) sigma[k] = std::sqrt(column_dot(k, k).real());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

  SingularDecomposition out;
  out.singular_values.resize(n);
  out.right_vectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.singular_values[k] = sigma[order[k]];
    for (std::size_t r = 0; r < n; ++r) out.right_vectors(r, k) = v(r, order[k]);
  }
  return out;
}

ComplexMatrix null_space(const ComplexMatrix& a, double tol) {
  const SingularDecomposition svd = singular_decomposition(a);
  std::vector<std::size_t> kernel;
  for (std::size_t k = 0; k < svd.singular_values.size(); ++k) {
    if (svd.singular_values[k] <= tol) kernel.push_back(k);
  }
  ComplexMatrix out(a.cols(), kernel.size());
  for (std::size_t j = 0; j < kernel.size(); ++j) {
    for (std::size_t r = 0; r < a.cols(); ++r) out(r, j) = svd.right_vectors(r, kernel[j]);
  }
  return out;
}

}  // namespace vnrecur
