#pragma once

// Symmetric gradients on (M_n(C), tr) in the inner form
//   grad(a) = (i [T_1, a], ..., i [T_m, a]),  T_k Hermitian,
// with adjoint div(v) = sum_k -i [T_k, v_k] and Laplacian div o grad.

#include <memory>
#include <span>
#include <vector>

#include "ncot/matrix.hpp"
#include "ncot/spectral.hpp"
#include "ncot/superoperator.hpp"

namespace ncot {

/// Laplacian restricted to Hermitian matrices, written in real coordinates
/// (hermitian_basis.hpp) and split into kernel and its orthogonal complement.
struct HermitianSplit {
  std::size_t n = 0;
  RMatrix range_basis;   // n^2 x r, orthonormal columns spanning (ker grad)^perp
  RMatrix kernel_basis;  // n^2 x (n^2 - r), orthonormal columns spanning ker grad
  std::vector<CMatrix> kernel_matrices;  // the kernel columns as matrices

  std::size_t range_dim() const { return range_basis.cols(); }
  std::size_t kernel_dim() const { return kernel_basis.cols(); }
};

class Derivation {
 public:
  Derivation() = default;
  Derivation(std::size_t n, std::vector<HermitianMatrix> generators);

  // No generators: grad == 0.
  static Derivation zero(std::size_t n) { return Derivation(n, {}); }

  std::size_t n() const { return n_; }
  std::size_t m() const { return generators_.size(); }
  const std::vector<HermitianMatrix>& generators() const { return generators_; }

  std::vector<CMatrix> grad(const CMatrix& a) const;
  CMatrix grad_component(std::size_t k, const CMatrix& a) const;
  CMatrix divergence(std::span<const CMatrix> v) const;
  // sum_k [T_k, [T_k, a]]
  CMatrix laplacian_apply(const CMatrix& a) const;

  // Cached on first use; safe to call concurrently.
  const Superoperator& laplacian() const;
  const SpectralDecomposition& laplacian_spectrum() const;
  const HermitianSplit& hermitian_split() const;

  // Eigenvalues of the Laplacian at or below this value count as kernel.
  double kernel_threshold() const;

 private:
  struct Cache;

  std::size_t n_ = 0;
  std::vector<HermitianMatrix> generators_;
  std::shared_ptr<Cache> cache_;
};

std::vector<CMatrix> grad(const Derivation& d, const CMatrix& a);
CMatrix divergence(const Derivation& d, std::span<const CMatrix> v);
Superoperator laplacian(const Derivation& d);

/// exp(-t Laplacian) p.
DensityMatrix heat(const Derivation& d, const DensityMatrix& p, double t);

/// Smallest nonzero eigenvalue of the Laplacian, 0 if the Laplacian vanishes.
double spectral_gap(const Derivation& d);

struct ErgodicityReport {
  bool ergodic = false;
  // Hilbert-Schmidt orthonormal Hermitian basis of ker Laplacian.
  std::vector<CMatrix> kernel_basis;
};

ErgodicityReport is_ergodic(const Derivation& d);

// Sum of the Hilbert-Schmidt inner products <a_k, b_k>.
cplx tuple_inner(std::span<const CMatrix> a, std::span<const CMatrix> b);

}  // namespace ncot
