#include "ncot/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "ncot/errors.hpp"

namespace ncot {

namespace {

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch");
  }
}

}  // namespace

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const double> d) {
  CMatrix m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

CMatrix CMatrix::transpose() const {
  CMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

cplx CMatrix::trace() const {
  cplx s = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

CMatrix& CMatrix::operator+=(const CMatrix& o) {
  require_same_shape(*this, o, "operator+=");
  kernels::active().caxpy(data_.size(), 1.0, o.data_.data(), data_.data());
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& o) {
  require_same_shape(*this, o, "operator-=");
  kernels::active().caxpy(data_.size(), -1.0, o.data_.data(), data_.data());
  return *this;
}

CMatrix& CMatrix::operator*=(cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

CMatrix& CMatrix::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

void CMatrix::add_scaled(cplx s, const CMatrix& o) {
  require_same_shape(*this, o, "add_scaled");
  kernels::active().caxpy(data_.size(), s, o.data_.data(), data_.data());
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
CMatrix operator*(double s, CMatrix a) { return a *= s; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimension mismatch");
  const auto& k = kernels::active();
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx* ci = c.row(i);
    const cplx* ai = a.row(i);
    for (std::size_t l = 0; l < a.cols(); ++l) {
      if (ai[l] != 0.0) k.caxpy(b.cols(), ai[l], b.row(l), ci);
    }
  }
  return c;
}

CMatrix adjoint_times(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("adjoint_times: dimension mismatch");
  const auto& k = kernels::active();
  CMatrix c(a.cols(), b.cols());
  // (A^* B)_{ij} = sum_l conj(A_{li}) B_{lj}: accumulate row l of B into row i.
  for (std::size_t l = 0; l < a.rows(); ++l) {
    const cplx* al = a.row(l);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      if (al[i] != 0.0) k.caxpy(b.cols(), std::conj(al[i]), b.row(l), c.row(i));
    }
  }
  return c;
}

CMatrix times_adjoint(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) throw DimensionError("times_adjoint: dimension mismatch");
  const auto& k = kernels::active();
  CMatrix c(a.rows(), b.rows());
  // (A B^*)_{ij} = sum_l A_{il} conj(B_{jl}) = conj(cdotc(A_i, B_j))
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      c(i, j) = std::conj(k.cdotc(a.cols(), a.row(i), b.row(j)));
  return c;
}

cplx hs_inner(const CMatrix& a, const CMatrix& b) {
  require_same_shape(a, b, "hs_inner");
  return kernels::active().cdotc(a.data().size(), a.data().data(), b.data().data());
}

double hs_norm(const CMatrix& a) { return std::sqrt(std::max(0.0, hs_inner(a, a).real())); }

double max_abs(const CMatrix& a) {
  double m = 0.0;
  for (const auto& x : a.data()) m = std::max(m, std::abs(x));
  return m;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

CMatrix hermitian_part(const CMatrix& a) {
  if (!a.square()) throw DimensionError("hermitian_part: matrix not square");
  CMatrix h(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    h(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < a.rows(); ++j) {
      const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
      h(i, j) = v;
      h(j, i) = std::conj(v);
    }
  }
  return h;
}

std::vector<cplx> vectorize(const CMatrix& a) {
  const std::size_t n = a.rows();
  std::vector<cplx> v(n * a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t i = 0; i < n; ++i) v[i + j * n] = a(i, j);
  return v;
}

CMatrix unvectorize(std::span<const cplx> v, std::size_t n) {
  if (v.size() != n * n) throw DimensionError("unvectorize: length is not n^2");
  CMatrix a(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) a(i, j) = v[i + j * n];
  return a;
}

CMatrix block_diagonal(std::span<const CMatrix> blocks) {
  std::size_t total = 0;
  for (const auto& b : blocks) {
    if (!b.square()) throw DimensionError("block_diagonal: block not square");
    total += b.rows();
  }
  CMatrix m(total);
  std::size_t off = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) m(off + i, off + j) = b(i, j);
    off += b.rows();
  }
  return m;
}

std::vector<double> matvec(const RMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
  const auto& k = kernels::active();
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = k.ddot(a.cols(), a.row(i), x.data());
  return y;
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
  return kernels::active().ddot(x.size(), x.data(), y.data());
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace ncot
