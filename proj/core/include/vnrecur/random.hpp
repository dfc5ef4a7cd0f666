#pragma once

// Seeded generators for the sampled checks. std::mt19937_64 is fully
// specified, so streams depend only on the seed and the distribution code.

#include <cstdint>
#include <random>

#include "vnrecur/matrix_core.hpp"

namespace vnrecur {

using Rng = std::mt19937_64;

// Entries with independent standard-normal real and imaginary parts.
ComplexMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng);
ComplexMatrix random_hermitian(std::size_t n, Rng& rng);
// e^{-iH} for a random Hermitian H.
ComplexMatrix random_unitary(std::size_t n, Rng& rng);

double standard_normal(Rng& rng);
double uniform01(Rng& rng);

}  // namespace vnrecur
