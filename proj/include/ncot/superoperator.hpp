#pragma once

#include <functional>

#include "ncot/matrix.hpp"
#include "ncot/spectral.hpp"

namespace ncot {

/// Linear map on n x n matrices stored as an n^2 x n^2 matrix acting on
/// column-stacked vectors (see vectorize()).
class Superoperator {
 public:
  Superoperator() = default;
  Superoperator(std::size_t n, CMatrix matrix);

  static Superoperator identity(std::size_t n);
  static Superoperator zero(std::size_t n);
  // Tabulates `map` on the matrix units E_ij.
  static Superoperator from_map(std::size_t n, const std::function<CMatrix(const CMatrix&)>& map);

  std::size_t n() const { return n_; }
  const CMatrix& matrix() const { return matrix_; }

  CMatrix apply(const CMatrix& h) const;
  std::vector<cplx> apply_vec(std::span<const cplx> v) const;

  Superoperator adjoint() const;  // w.r.t. the Hilbert-Schmidt inner product
  Superoperator compose(const Superoperator& inner) const;  // this o inner

  // Max deviation from self-adjointness, in absolute entries.
  double self_adjoint_defect() const;

  /// Spectrum of a Hilbert-Schmidt self-adjoint superoperator. Eigenvectors
  /// are column-stacked matrices.
  SpectralDecomposition eigh() const;

  // Largest singular value.
  double opnorm() const;

 private:
  std::size_t n_ = 0;
  CMatrix matrix_;
};

Superoperator operator+(const Superoperator& a, const Superoperator& b);
Superoperator operator-(const Superoperator& a, const Superoperator& b);
Superoperator operator*(double s, const Superoperator& a);

}  // namespace ncot
