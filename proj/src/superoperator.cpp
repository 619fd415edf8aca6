#include "ncot/superoperator.hpp"

#include <algorithm>
#include <cmath>

#include "ncot/errors.hpp"

namespace ncot {

Superoperator::Superoperator(std::size_t n, CMatrix matrix) : n_(n), matrix_(std::move(matrix)) {
  if (matrix_.rows() != n * n || matrix_.cols() != n * n) {
    throw DimensionError("Superoperator: matrix must be n^2 x n^2");
  }
}

Superoperator Superoperator::identity(std::size_t n) {
  return Superoperator(n, CMatrix::identity(n * n));
}

Superoperator Superoperator::zero(std::size_t n) { return Superoperator(n, CMatrix(n * n)); }

Superoperator Superoperator::from_map(std::size_t n,
                                      const std::function<CMatrix(const CMatrix&)>& map) {
  const std::size_t nn = n * n;
  CMatrix m(nn);
  CMatrix unit(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      unit(i, j) = 1.0;
      const CMatrix image = map(unit);
      unit(i, j) = 0.0;
      if (image.rows() != n || image.cols() != n) {
        throw DimensionError("Superoperator::from_map: map changed the dimension");
      }
      const std::size_t col = i + j * n;
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t a = 0; a < n; ++a) m(a + b * n, col) = image(a, b);
    }
  }
  return Superoperator(n, std::move(m));
}

std::vector<cplx> Superoperator::apply_vec(std::span<const cplx> v) const {
  if (v.size() != n_ * n_) throw DimensionError("Superoperator::apply_vec: length mismatch");
  const auto& k = kernels::active();
  std::vector<cplx> out(v.size());
  for (std::size_t r = 0; r < v.size(); ++r) out[r] = k.cdotu(v.size(), matrix_.row(r), v.data());
  return out;
}

CMatrix Superoperator::apply(const CMatrix& h) const {
  if (h.rows() != n_ || h.cols() != n_) throw DimensionError("Superoperator::apply: dimension mismatch");
  return unvectorize(apply_vec(vectorize(h)), n_);
}

Superoperator Superoperator::adjoint() const { return Superoperator(n_, matrix_.adjoint()); }

Superoperator Superoperator::compose(const Superoperator& inner) const {
  if (inner.n_ != n_) throw DimensionError("Superoperator::compose: dimension mismatch");
  return Superoperator(n_, matrix_ * inner.matrix_);
}

double Superoperator::self_adjoint_defect() const {
  double d = 0.0;
  for (std::size_t i = 0; i < matrix_.rows(); ++i)
    for (std::size_t j = i; j < matrix_.cols(); ++j)
      d = std::max(d, std::abs(matrix_(i, j) - std::conj(matrix_(j, i))));
  return d;
}

SpectralDecomposition Superoperator::eigh() const { return eig(HermitianMatrix(matrix_)); }

double Superoperator::opnorm() const {
  const SpectralDecomposition s = eig(HermitianMatrix(adjoint_times(matrix_, matrix_)));
  return std::sqrt(std::max(0.0, s.eigenvalues.back()));
}

Superoperator operator+(const Superoperator& a, const Superoperator& b) {
  if (a.n() != b.n()) throw DimensionError("Superoperator +: dimension mismatch");
  return Superoperator(a.n(), a.matrix() + b.matrix());
}

Superoperator operator-(const Superoperator& a, const Superoperator& b) {
  if (a.n() != b.n()) throw DimensionError("Superoperator -: dimension mismatch");
  return Superoperator(a.n(), a.matrix() - b.matrix());
}

Superoperator operator*(double s, const Superoperator& a) {
  return Superoperator(a.n(), s * a.matrix());
}

}  // namespace ncot
