#include "vnrecur/random.hpp"

#include <cmath>
#include <numbers>

namespace vnrecur {

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller, written out so the stream does not depend on the standard
// library's normal_distribution.
double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix m(rows, cols);
  for (auto& z : m.entries()) {
    const double re = standard_normal(rng);
    const double im = standard_normal(rng);
    z = Complex(re, im);
  }
  return m;
}

ComplexMatrix random_hermitian(std::size_t n, Rng& rng) {
  const ComplexMatrix g = random_matrix(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

ComplexMatrix random_unitary(std::size_t n, Rng& rng) {
  return unitary_exp(random_hermitian(n, rng), 1.0);
}

}  // namespace vnrecur
