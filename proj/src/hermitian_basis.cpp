#include "ncot/hermitian_basis.hpp"

#include <cmath>

#include "ncot/errors.hpp"

namespace ncot {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
}

std::size_t hermitian_dimension(std::size_t n) { return n * n; }

CMatrix hermitian_basis_element(std::size_t n, std::size_t index) {
  std::vector<double> x(n * n, 0.0);
  if (index >= x.size()) throw DimensionError("hermitian_basis_element: index out of range");
  x[index] = 1.0;
  return from_hermitian_coords(x, n);
}

std::vector<double> hermitian_coords(const CMatrix& h) {
  const std::size_t n = h.rows();
  std::vector<double> x(n * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) x[k++] = h(i, i).real();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Averaging both triangles makes this the HS projection for any input.
      const cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      x[k++] = kSqrt2 * v.real();
      x[k++] = -kSqrt2 * v.imag();
    }
  }
  return x;
}

CMatrix from_hermitian_coords(std::span<const double> x, std::size_t n) {
  if (x.size() != n * n) throw DimensionError("from_hermitian_coords: length is not n^2");
  CMatrix h(n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) h(i, i) = x[k++];
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = x[k++] / kSqrt2;
      const double a = x[k++] / kSqrt2;
      h(i, j) = cplx(s, -a);
      h(j, i) = cplx(s, a);
    }
  }
  return h;
}

}  // namespace ncot
