#include "vnrecur/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "vnrecur/errors.hpp"
#include "vnrecur/random.hpp"

namespace vnrecur {

namespace {

// U* A U block by block; a 1x1 block commutes with its phase, so it is copied
// exactly instead of picking up rounding from |u|^2.
AlgebraElement conjugate(const AlgebraElement& u, const AlgebraElement& a) {
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(a.block_count());
  for (std::size_t k = 0; k < a.block_count(); ++k) {
    const ComplexMatrix& uk = u.block(k);
    blocks.push_back(uk.rows() == 1 ? a.block(k) : uk.adjoint() * a.block(k) * uk);
  }
  return AlgebraElement(std::move(blocks));
}

}  // namespace

BoundedQuantumSystem::BoundedQuantumSystem(BlockAlgebra alg, AlgebraElement hamiltonian)
    : algebra_(std::move(alg)), hamiltonian_(std::move(hamiltonian)) {
  algebra_.require_contains(hamiltonian_);
  spectra_.reserve(algebra_.block_count());
  for (std::size_t k = 0; k < algebra_.block_count(); ++k) {
    const ComplexMatrix& block = hamiltonian_.block(k);
    const double defect = hermiticity_defect(block);
    if (defect > 1e-10) {
      throw Error(ErrorCode::NotHermitian, "Hamiltonian block " + std::to_string(k) +
                                               " has ||H - H*||_F = " + std::to_string(defect));
    }
    spectra_.push_back(hermitian_eig(block));
  }
}

AlgebraElement BoundedQuantumSystem::propagator(double t) const {
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(spectra_.size());
  for (std::size_t k = 0; k < spectra_.size(); ++k) {
    blocks.push_back(t == 0.0 ? ComplexMatrix::identity(algebra_.dim(k))
                              : unitary_exp(spectra_[k], t));
  }
  return AlgebraElement(std::move(blocks));
}

Endomorphism BoundedQuantumSystem::step(double t) const {
  return Endomorphism::conjugation(algebra_, propagator(t));
}

double BoundedQuantumSystem::hamiltonian_norm() const {
  double best = 0.0;
  for (const auto& eig : spectra_) {
    for (double lambda : eig.eigenvalues) best = std::max(best, std::abs(lambda));
  }
  return best;
}

bool BoundedQuantumSystem::is_period(double t, double tol) const {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (const auto& eig : spectra_) {
    for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
      for (std::size_t j = i + 1; j < eig.eigenvalues.size(); ++j) {
        const double phase = (eig.eigenvalues[j] - eig.eigenvalues[i]) * t;
        const double offset = phase - kTwoPi * std::round(phase / kTwoPi);
        if (std::abs(offset) > tol) return false;
      }
    }
  }
  return true;
}

AlgebraElement evolve(const BoundedQuantumSystem& sys, double t, const AlgebraElement& a) {
  sys.algebra().require_contains(a);
  if (t == 0.0) return a;
  return conjugate(sys.propagator(t), a);
}

LiouvilleReport verify_liouville(const BoundedQuantumSystem& sys, std::size_t sample_count,
                                 std::span<const double> t_grid, std::uint64_t seed) {
  Rng rng(seed);
  const BlockAlgebra& alg = sys.algebra();
  std::vector<AlgebraElement> propagators;
  propagators.reserve(t_grid.size());
  for (double t : t_grid) propagators.push_back(sys.propagator(t));

  LiouvilleReport report;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const AlgebraElement a = alg.random_element(rng);
    const Complex before = trace(alg, a);
    for (const auto& u : propagators) {
      const Complex after = trace(alg, conjugate(u, a));
      report.max_deviation = std::max(report.max_deviation, std::abs(after - before));
      ++report.evaluations;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Endomorphism

Endomorphism::Endomorphism(BlockAlgebra alg, std::vector<std::size_t> block_map,
                           AlgebraElement unitary)
    : algebra_(std::move(alg)), block_map_(std::move(block_map)), unitary_(std::move(unitary)) {
  const std::size_t blocks = algebra_.block_count();
  if (block_map_.size() != blocks) {
    throw Error(ErrorCode::InvalidArgument, "block map has length " +
                                                std::to_string(block_map_.size()) + ", expected " +
                                                std::to_string(blocks));
  }
  for (std::size_t k = 0; k < blocks; ++k) {
    if (block_map_[k] >= blocks) {
      throw Error(ErrorCode::InvalidArgument, "block map entry " + std::to_string(k) +
                                                  " out of range");
    }
    if (algebra_.dim(block_map_[k]) != algebra_.dim(k)) {
      throw Error(ErrorCode::InvalidArgument, "block map sends block " + std::to_string(k) +
                                                  " to a block of different dimension");
    }
  }
  algebra_.require_contains(unitary_);
  for (std::size_t k = 0; k < blocks; ++k) {
    const ComplexMatrix& u = unitary_.block(k);
    const double defect = (u.adjoint() * u - ComplexMatrix::identity(u.rows())).frobenius_norm();
    if (defect > 1e-10) {
      throw Error(ErrorCode::InvalidArgument, "unitary block " + std::to_string(k) +
                                                  " has ||U*U - I||_F = " +
                                                  std::to_string(defect));
    }
  }
}

Endomorphism Endomorphism::identity(const BlockAlgebra& alg) {
  std::vector<std::size_t> map(alg.block_count());
  std::iota(map.begin(), map.end(), std::size_t{0});
  return Endomorphism(alg, std::move(map), alg.identity());
}

Endomorphism Endomorphism::conjugation(const BlockAlgebra& alg, AlgebraElement unitary) {
  std::vector<std::size_t> map(alg.block_count());
  std::iota(map.begin(), map.end(), std::size_t{0});
  return Endomorphism(alg, std::move(map), std::move(unitary));
}

Endomorphism Endomorphism::block_permutation(const BlockAlgebra& alg,
                                             std::vector<std::size_t> permutation,
                                             AlgebraElement unitary) {
  Endomorphism tau(alg, std::move(permutation), std::move(unitary));
  if (!tau.is_automorphism()) {
    throw Error(ErrorCode::InvalidArgument, "block permutation is not a bijection");
  }
  for (std::size_t k = 0; k < alg.block_count(); ++k) {
    if (std::abs(alg.weight(tau.block_map_[k]) - alg.weight(k)) > kWeightSumTol) {
      throw Error(ErrorCode::InvalidArgument, "block permutation moves block " +
                                                  std::to_string(k) +
                                                  " onto a block of different weight");
    }
  }
  return tau;
}

AlgebraElement Endomorphism::operator()(const AlgebraElement& a) const {
  algebra_.require_contains(a);
  std::vector<ComplexMatrix> blocks;
  blocks.reserve(block_map_.size());
  for (std::size_t k = 0; k < block_map_.size(); ++k) {
    const ComplexMatrix& u = unitary_.block(k);
    const ComplexMatrix& source = a.block(block_map_[k]);
    blocks.push_back(u.rows() == 1 ? source : u.adjoint() * source * u);
  }
  return AlgebraElement(std::move(blocks));
}

bool Endomorphism::is_automorphism() const {
  std::vector<bool> hit(block_map_.size(), false);
  for (auto target : block_map_) {
    if (hit[target]) return false;
    hit[target] = true;
  }
  return true;
}

bool Endomorphism::preserves_trace(double tol) const {
  std::vector<double> pulled_back(block_map_.size(), 0.0);
  for (std::size_t k = 0; k < block_map_.size(); ++k) pulled_back[block_map_[k]] += algebra_.weight(k);
  for (std::size_t j = 0; j < block_map_.size(); ++j) {
    if (std::abs(pulled_back[j] - algebra_.weight(j)) > tol) return false;
  }
  return true;
}

AlgebraElement apply_endo(const Endomorphism& tau, const AlgebraElement& a, std::size_t n) {
  tau.algebra().require_contains(a);
  AlgebraElement out = a;
  for (std::size_t i = 0; i < n; ++i) out = tau(out);
  return out;
}

VonNeumannReport von_neumann_check(const BoundedQuantumSystem& sys, const AlgebraElement& rho,
                                   double t, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step h must be positive");
  const AlgebraElement at_t = evolve(sys, -t, rho);
  const AlgebraElement ahead = evolve(sys, -(t + h), rho);
  const AlgebraElement behind = evolve(sys, -(t - h), rho);
  const AlgebraElement derivative = (1.0 / (2.0 * h)) * (ahead - behind);
  const AlgebraElement& hamiltonian = sys.hamiltonian();
  const AlgebraElement rhs = Complex(0.0, 1.0) * (at_t * hamiltonian - hamiltonian * at_t);
  return VonNeumannReport{(derivative - rhs).frobenius_norm()};
}

}  // namespace vnrecur
