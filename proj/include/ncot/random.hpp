#pragma once

// Seeded samplers shared by the curvature estimators and the check suites.
// Every sampler takes the engine explicitly so results depend only on the seed.

#include <cstdint>
#include <random>

#include "ncot/derivation.hpp"
#include "ncot/spectral.hpp"

namespace ncot {

using Rng = std::mt19937_64;

// Engine for item `index` of a run seeded with `seed`; independent of the
// order in which items are processed.
Rng make_rng(std::uint64_t seed, std::uint64_t index = 0);

// Entries standard complex Gaussian (real and imaginary parts N(0, 1/2)).
CMatrix random_gaussian(Rng& rng, std::size_t rows, std::size_t cols);
HermitianMatrix random_hermitian(Rng& rng, std::size_t n);
// Y Y^* / tr(Y Y^*) with Y square standard complex Gaussian.
DensityMatrix random_density(Rng& rng, std::size_t n);
// Same with Y of shape n x rank, so the result has the given rank.
DensityMatrix random_density_of_rank(Rng& rng, std::size_t n, std::size_t rank);
Derivation random_derivation(Rng& rng, std::size_t n, std::size_t m);

}  // namespace ncot
