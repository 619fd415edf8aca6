#pragma once

#include <cmath>
#include <complex>

#include "ncot/matrix.hpp"
#include "ncot/spectral.hpp"

namespace ncot::test {

inline double diff_norm(const CMatrix& a, const CMatrix& b) { return hs_norm(a - b); }

inline CMatrix pauli_x() {
  CMatrix m(2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

inline CMatrix pauli_y() {
  CMatrix m(2);
  m(0, 1) = cplx(0.0, -1.0);
  m(1, 0) = cplx(0.0, 1.0);
  return m;
}

inline CMatrix pauli_z() {
  CMatrix m(2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

inline CMatrix diag(std::initializer_list<double> d) {
  std::vector<double> v(d);
  return CMatrix::diagonal(v);
}

}  // namespace ncot::test
