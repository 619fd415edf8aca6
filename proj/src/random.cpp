#include "ncot/random.hpp"

#include <cmath>

namespace ncot {

Rng make_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

CMatrix random_gaussian(Rng& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  CMatrix m(rows, cols);
  for (auto& x : m.data()) {
    const double re = normal(rng);
    const double im = normal(rng);
    x = cplx(re, im);
  }
  return m;
}

HermitianMatrix random_hermitian(Rng& rng, std::size_t n) {
  return HermitianMatrix(random_gaussian(rng, n, n));
}

DensityMatrix random_density(Rng& rng, std::size_t n) { return random_density_of_rank(rng, n, n); }

DensityMatrix random_density_of_rank(Rng& rng, std::size_t n, std::size_t rank) {
  const CMatrix y = random_gaussian(rng, n, rank);
  return DensityMatrix(times_adjoint(y, y));
}

Derivation random_derivation(Rng& rng, std::size_t n, std::size_t m) {
  std::vector<HermitianMatrix> gens;
  gens.reserve(m);
  for (std::size_t k = 0; k < m; ++k) gens.push_back(random_hermitian(rng, n));
  return Derivation(n, std::move(gens));
}

}  // namespace ncot
