#pragma once

// Independent reference computations used to freeze expected values in the
// tests. Nothing here calls the code paths it is used to check.

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;

// Eigenvalues of [[a, b], [conj(b), c]] from the characteristic polynomial.
inline std::pair<double, double> hermitian_2x2_eigenvalues(double a, Complex b, double c) {
  const double mean = 0.5 * (a + c);
  const double radius = std::sqrt(0.25 * (a - c) * (a - c) + std::norm(b));
  return {mean - radius, mean + radius};
}

// U_t* P_+ U_t for H = diag(1, -1), P_+ = (1/2)[[1, 1], [1, 1]], row-major.
inline std::vector<Complex> two_level_evolved_projection(double t) {
  const Complex up = std::polar(0.5, 2.0 * t);
  return {0.5, up, std::conj(up), 0.5};
}

// tr(P_+ tau_t(P_+)) with tr = Tr / 2, by explicit 2x2 products.
inline double two_level_correlation(double t) {
  const std::vector<Complex> p = {0.5, 0.5, 0.5, 0.5};
  const std::vector<Complex> q = two_level_evolved_projection(t);
  Complex tr = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) tr += p[i * 2 + k] * q[k * 2 + i];
  }
  return 0.5 * tr.real();
}

// mu(S and T^{-n}(S)) by following every orbit of S for n steps.
inline double orbit_overlap(const std::vector<double>& weights, const std::vector<std::size_t>& map,
                            const std::vector<bool>& in_set, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!in_set[i]) continue;
    std::size_t j = i;
    for (std::size_t step = 0; step < n; ++step) j = map[j];
    if (in_set[j]) total += weights[i];
  }
  return total;
}

}  // namespace oracle
