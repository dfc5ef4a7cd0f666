#include "vnrecur/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vnrecur/errors.hpp"

namespace vnrecur {

namespace {

// Tr(XY) without forming the product.
Complex trace_of_product(const ComplexMatrix& x, const ComplexMatrix& y) {
  Complex sum = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) sum += x(i, j) * y(j, i);
  }
  return sum;
}

void require_same_blocks(const AlgebraElement& a, const AlgebraElement& b, const char* op) {
  if (a.block_count() != b.block_count()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": block counts " +
                                              std::to_string(a.block_count()) + " vs " +
                                              std::to_string(b.block_count()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// BlockAlgebra

BlockAlgebra::BlockAlgebra(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw Error(ErrorCode::InvalidArgument, "algebra needs at least one block");
  double total = 0.0;
  for (auto n : dims_) total += static_cast<double>(n * n);
  weights_.reserve(dims_.size());
  for (auto n : dims_) weights_.push_back(static_cast<double>(n * n) / total);
  if (std::any_of(dims_.begin(), dims_.end(), [](std::size_t n) { return n == 0; })) {
    throw Error(ErrorCode::InvalidArgument, "block dimensions must be >= 1");
  }
}

BlockAlgebra::BlockAlgebra(std::vector<std::size_t> dims, std::vector<double> weights)
    : dims_(std::move(dims)), weights_(std::move(weights)) {
  if (dims_.empty()) throw Error(ErrorCode::InvalidArgument, "algebra needs at least one block");
  if (dims_.size() != weights_.size()) {
    throw Error(ErrorCode::InvalidArgument, "block_dims and block_weights differ in length");
  }
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (dims_[k] == 0) throw Error(ErrorCode::InvalidArgument, "block dimensions must be >= 1");
    if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
      throw Error(ErrorCode::InvalidArgument,
                  "block weight " + std::to_string(k) + " must be positive and finite");
    }
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw Error(ErrorCode::InvalidArgument,
                "block weights must sum to 1 (sum = " + std::to_string(total) + ")");
  }
}

BlockAlgebra BlockAlgebra::abelian(std::vector<double> weights) {
  std::vector<std::size_t> dims(weights.size(), 1);
  return BlockAlgebra(std::move(dims), std::move(weights));
}

bool BlockAlgebra::is_abelian() const noexcept {
  return std::all_of(dims_.begin(), dims_.end(), [](std::size_t n) { return n == 1; });
}

std::size_t BlockAlgebra::linear_dimension() const noexcept {
  std::size_t total = 0;
  for (auto n : dims_) total += n * n;
  return total;
}

AlgebraElement BlockAlgebra::identity() const {
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(dims_.size());
  for (auto n : dims_) blocks.push_back(ComplexMatrix::identity(n));
  return AlgebraElement(std::move(blocks));
}

AlgebraElement BlockAlgebra::zero() const {
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(dims_.size());
  for (auto n : dims_) blocks.emplace_back(n, n);
  return AlgebraElement(std::move(blocks));
}

AlgebraElement BlockAlgebra::random_element(Rng& rng) const {
  std::vector<ComplexMatrix> blocks;
  for (auto n : dims_) blocks.push_back(random_matrix(n, n, rng));
  return AlgebraElement(std::move(blocks));
}

AlgebraElement BlockAlgebra::random_hermitian(Rng& rng) const {
  std::vector<ComplexMatrix> blocks;
  for (auto n : dims_) blocks.push_back(vnrecur::random_hermitian(n, rng));
  return AlgebraElement(std::move(blocks));
}

AlgebraElement BlockAlgebra::random_unitary(Rng& rng) const {
  std::vector<ComplexMatrix> blocks;
  for (auto n : dims_) blocks.push_back(vnrecur::random_unitary(n, rng));
  return AlgebraElement(std::move(blocks));
}

std::vector<Complex> BlockAlgebra::coordinates(const AlgebraElement& a) const {
  require_contains(a);
  std::vector<Complex> out;
  out.reserve(linear_dimension());
  for (const auto& block : a.blocks()) {
    out.insert(out.end(), block.entries().begin(), block.entries().end());
  }
  return out;
}

AlgebraElement BlockAlgebra::from_coordinates(std::span<const Complex> coords) const {
  if (coords.size() != linear_dimension()) {
    throw Error(ErrorCode::ShapeMismatch, "coordinate vector has length " +
                                              std::to_string(coords.size()) + ", expected " +
                                              std::to_string(linear_dimension()));
  }
  std::vector<ComplexMatrix> blocks;
  std::size_t offset = 0;
  for (auto n : dims_) {
    blocks.emplace_back(n, n,
                        std::vector<Complex>(coords.begin() + static_cast<std::ptrdiff_t>(offset),
                                             coords.begin() + static_cast<std::ptrdiff_t>(offset + n * n)));
    offset += n * n;
  }
  return AlgebraElement(std::move(blocks));
}

AlgebraElement BlockAlgebra::matrix_unit(std::size_t index) const {
  std::vector<Complex> coords(linear_dimension());
  coords.at(index) = 1.0;
  return from_coordinates(coords);
}

bool BlockAlgebra::contains(const AlgebraElement& a) const noexcept {
  if (a.block_count() != dims_.size()) return false;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (a.block(k).rows() != dims_[k] || a.block(k).cols() != dims_[k]) return false;
  }
  return true;
}

void BlockAlgebra::require_contains(const AlgebraElement& a) const {
  if (a.block_count() != dims_.size()) {
    throw Error(ErrorCode::ShapeMismatch, "element has " + std::to_string(a.block_count()) +
                                              " blocks, algebra has " +
                                              std::to_string(dims_.size()));
  }
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (a.block(k).rows() != dims_[k] || a.block(k).cols() != dims_[k]) {
      throw Error(ErrorCode::ShapeMismatch, "block " + std::to_string(k) + " is " +
                                                std::to_string(a.block(k).rows()) + "x" +
                                                std::to_string(a.block(k).cols()) + ", expected " +
                                                std::to_string(dims_[k]) + "x" +
                                                std::to_string(dims_[k]));
    }
  }
}

// ---------------------------------------------------------------------------
// AlgebraElement

AlgebraElement::AlgebraElement(std::vector<ComplexMatrix> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (!b.is_square()) throw Error(ErrorCode::NotSquare, "algebra blocks must be square");
  }
}

AlgebraElement AlgebraElement::adjoint() const {
  std::vector<ComplexMatrix> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.adjoint());
  return AlgebraElement(std::move(out));
}

double AlgebraElement::frobenius_norm() const {
  double sum = 0.0;
  for (const auto& b : blocks_) sum += std::pow(b.frobenius_norm(), 2);
  return std::sqrt(sum);
}

double AlgebraElement::operator_norm() const {
  double best = 0.0;
  for (const auto& b : blocks_) best = std::max(best, b.operator_norm());
  return best;
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  require_same_blocks(*this, other, "operator+");
  for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += other.blocks_[k];
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  require_same_blocks(*this, other, "operator-");
  for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] -= other.blocks_[k];
  return *this;
}

AlgebraElement& AlgebraElement::operator*=(Complex scalar) {
  for (auto& b : blocks_) b *= scalar;
  return *this;
}

AlgebraElement operator+(AlgebraElement lhs, const AlgebraElement& rhs) { return lhs += rhs; }
AlgebraElement operator-(AlgebraElement lhs, const AlgebraElement& rhs) { return lhs -= rhs; }
AlgebraElement operator*(Complex scalar, AlgebraElement a) { return a *= scalar; }

AlgebraElement operator*(const AlgebraElement& lhs, const AlgebraElement& rhs) {
  require_same_blocks(lhs, rhs, "operator*");
  std::vector<ComplexMatrix> out;
  out.reserve(lhs.block_count());
  for (std::size_t k = 0; k < lhs.block_count(); ++k) out.push_back(lhs.block(k) * rhs.block(k));
  return AlgebraElement(std::move(out));
}

double hermiticity_defect(const AlgebraElement& a) {
  double worst = 0.0;
  for (const auto& b : a.blocks()) worst = std::max(worst, hermiticity_defect(b));
  return worst;
}

AlgebraElement CenterElement::to_element(const BlockAlgebra& alg) const {
  if (scalars.size() != alg.block_count()) {
    throw Error(ErrorCode::ShapeMismatch, "center element has wrong number of scalars");
  }
  AlgebraElement out = alg.identity();
  for (std::size_t k = 0; k < scalars.size(); ++k) out.block(k) *= scalars[k];
  return out;
}

// ---------------------------------------------------------------------------
// LinearFunctional

LinearFunctional::LinearFunctional(BlockAlgebra alg, FunctionalKind kind, AlgebraElement density)
    : algebra_(std::move(alg)), kind_(kind), density_(std::move(density)) {}

LinearFunctional LinearFunctional::trace(const BlockAlgebra& alg) {
  return LinearFunctional(alg, FunctionalKind::Trace, alg.identity());
}

LinearFunctional LinearFunctional::density_state(const BlockAlgebra& alg, AlgebraElement rho,
                                                 double tol) {
  alg.require_contains(rho);
  for (std::size_t k = 0; k < rho.block_count(); ++k) {
    const ComplexMatrix& block = rho.block(k);
    const double defect = hermiticity_defect(block);
    if (defect > tol * (1.0 + block.frobenius_norm())) {
      throw Error(ErrorCode::NotAState,
                  "density block " + std::to_string(k) + " is not Hermitian");
    }
    const EigDecomposition eig = hermitian_eig(block);
    if (eig.eigenvalues.front() < -tol) {
      throw Error(ErrorCode::NotAState, "density block " + std::to_string(k) +
                                            " has eigenvalue " +
                                            std::to_string(eig.eigenvalues.front()));
    }
  }
  const Complex total = vnrecur::trace(alg, rho);
  if (std::abs(total - 1.0) > tol) {
    throw Error(ErrorCode::NotAState,
                "density has tr(rho) = " + std::to_string(total.real()) + ", expected 1");
  }
  return LinearFunctional(alg, FunctionalKind::DensityState, std::move(rho));
}

LinearFunctional LinearFunctional::vector_state(const BlockAlgebra& alg, std::size_t block,
                                                std::span<const Complex> psi) {
  if (block >= alg.block_count()) throw Error(ErrorCode::InvalidArgument, "no such block");
  if (psi.size() != alg.dim(block)) {
    throw Error(ErrorCode::ShapeMismatch, "state vector length does not match block dimension");
  }
  const double norm = vector_norm(psi);
  if (!(norm > 0.0)) throw Error(ErrorCode::NotAState, "zero state vector");
  AlgebraElement rho = alg.zero();
  // tr(rho) = w_k Tr(rho_k) / n_k must be 1.
  const double scale = static_cast<double>(alg.dim(block)) / (alg.weight(block) * norm * norm);
  ComplexMatrix& target = rho.block(block);
  for (std::size_t r = 0; r < psi.size(); ++r) {
    for (std::size_t c = 0; c < psi.size(); ++c) target(r, c) = scale * psi[r] * std::conj(psi[c]);
  }
  return LinearFunctional(alg, FunctionalKind::VectorState, std::move(rho));
}

Complex LinearFunctional::operator()(const AlgebraElement& a) const {
  if (kind_ == FunctionalKind::Trace) return vnrecur::trace(algebra_, a);
  algebra_.require_contains(a);
  Complex sum = 0.0;
  for (std::size_t k = 0; k < algebra_.block_count(); ++k) {
    sum += algebra_.weight(k) * trace_of_product(density_.block(k), a.block(k)) /
           static_cast<double>(algebra_.dim(k));
  }
  return sum;
}

double LinearFunctional::min_density_eigenvalue() const {
  if (kind_ == FunctionalKind::Trace) return 1.0;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& block : density_.blocks()) {
    lowest = std::min(lowest, hermitian_eig(block).eigenvalues.front());
  }
  return lowest;
}

// ---------------------------------------------------------------------------
// Free functions

Complex trace(const BlockAlgebra& alg, const AlgebraElement& a) {
  alg.require_contains(a);
  Complex sum = 0.0;
  for (std::size_t k = 0; k < alg.block_count(); ++k) {
    sum += alg.weight(k) * a.block(k).trace() / static_cast<double>(alg.dim(k));
  }
  return sum;
}

CenterElement center_valued_trace(const BlockAlgebra& alg, const AlgebraElement& a) {
  alg.require_contains(a);
  CenterElement out;
  out.scalars.reserve(alg.block_count());
  for (std::size_t k = 0; k < alg.block_count(); ++k) {
    out.scalars.push_back(a.block(k).trace() / static_cast<double>(alg.dim(k)));
  }
  return out;
}

double idempotency_defect(const AlgebraElement& a) {
  double worst = 0.0;
  for (const auto& b : a.blocks()) worst = std::max(worst, (b * b - b).frobenius_norm());
  return worst;
}

bool is_projection(const AlgebraElement& a, double tol) {
  return hermiticity_defect(a) <= tol && idempotency_defect(a) <= tol;
}

AdditivityReport check_additive(const LinearFunctional& phi,
                                std::span<const AlgebraElement> projections, double tol) {
  for (std::size_t i = 0; i < projections.size(); ++i) {
    if (!is_projection(projections[i], std::max(tol, kProjectionTol))) {
      throw Error(ErrorCode::NotProjection, "family member " + std::to_string(i));
    }
  }
  AdditivityReport report;
  report.pairwise_ok = true;
  for (std::size_t k = 0; k < projections.size() && report.pairwise_ok; ++k) {
    for (std::size_t l = k + 1; l < projections.size(); ++l) {
      const auto& pk = projections[k];
      if (phi(pk * projections[l] * pk).real() > tol) {
        report.pairwise_ok = false;
        break;
      }
    }
  }
  for (const auto& p : projections) report.sum += phi(p).real();
  if (report.pairwise_ok) report.additive_ok = report.sum <= 1.0 + tol;
  return report;
}

bool check_faithful_implies_orthogonal(const LinearFunctional& phi, const AlgebraElement& p,
                                       const AlgebraElement& q, double tol) {
  const BlockAlgebra& alg = phi.algebra();
  double scale_sq = 0.0;
  for (std::size_t k = 0; k < alg.block_count(); ++k) {
    const double lowest = phi.kind() == FunctionalKind::Trace
                              ? 1.0
                              : hermitian_eig(phi.density().block(k)).eigenvalues.front();
    if (!(lowest > 0.0)) {
      throw Error(ErrorCode::NotFaithful, "density block " + std::to_string(k) + " is singular");
    }
    scale_sq = std::max(scale_sq, static_cast<double>(alg.dim(k)) / (alg.weight(k) * lowest));
  }
  const double overlap = phi(p * q * p).real();
  if (overlap > tol) {
    throw Error(ErrorCode::HypothesisFailed, "phi(PQP) = " + std::to_string(overlap));
  }
  // phi(X*X) >= ||X||_F^2 / scale_sq, so phi(PQP) <= tol bounds ||QP||_F.
  const double bound = std::sqrt(std::max(tol, 0.0) * scale_sq) + 1e-12;
  return (q * p).frobenius_norm() <= bound && (p * q).frobenius_norm() <= bound;
}

bool check_cstar_trace(const LinearFunctional& phi, std::size_t sample_count, std::uint64_t seed,
                       double tol) {
  const BlockAlgebra& alg = phi.algebra();
  if (std::abs(phi(alg.identity()) - 1.0) > tol) return false;
  Rng rng(seed);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const AlgebraElement a = alg.random_element(rng);
    const AlgebraElement b = alg.random_element(rng);
    if (std::abs(phi(a * b) - phi(b * a)) > tol) return false;
  }
  return true;
}

LinearFunctional luders_update(const LinearFunctional& omega, const AlgebraElement& p,
                               double floor) {
  const BlockAlgebra& alg = omega.algebra();
  alg.require_contains(p);
  if (!is_projection(p)) {
    throw Error(ErrorCode::NotProjection,
                "||P^2 - P||_F = " + std::to_string(idempotency_defect(p)));
  }
  const double probability = omega(p).real();
  if (!(probability > floor)) {
    throw Error(ErrorCode::ZeroProbability,
                "omega(P) = " + std::to_string(probability) + " is not above the floor");
  }
  // omega(PAP) = tr(rho PAP) = tr(P rho P A)
  AlgebraElement rho = (1.0 / probability) * (p * omega.density() * p);
  rho = 0.5 * (rho + rho.adjoint());
  return LinearFunctional::density_state(alg, std::move(rho), 1e-9);
}

LinearFunctional tracial_state(const BlockAlgebra& alg) { return LinearFunctional::trace(alg); }

}  // namespace vnrecur
