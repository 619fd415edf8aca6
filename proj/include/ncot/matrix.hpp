#pragma once

// Small dense row-major matrices. Sizes in this library stay below ~1000 per
// side (superoperators of 32x32 matrices), so there is no blocking; the inner
// loops go through the kernel table.

#include <cstddef>
#include <span>
#include <vector>

#include "ncot/kernels.hpp"

namespace ncot {

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  explicit CMatrix(std::size_t n) : CMatrix(n, n) {}

  static CMatrix identity(std::size_t n);
  static CMatrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  bool empty() const { return data_.empty(); }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  cplx* row(std::size_t i) { return data_.data() + i * cols_; }
  const cplx* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  CMatrix adjoint() const;
  CMatrix transpose() const;
  cplx trace() const;

  CMatrix& operator+=(const CMatrix& o);
  CMatrix& operator-=(const CMatrix& o);
  CMatrix& operator*=(cplx s);
  CMatrix& operator*=(double s);

  // this += s * o
  void add_scaled(cplx s, const CMatrix& o);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(cplx s, CMatrix a);
CMatrix operator*(double s, CMatrix a);
CMatrix operator*(const CMatrix& a, const CMatrix& b);

// A^* B, i.e. the adjoint of the left factor without materializing it.
CMatrix adjoint_times(const CMatrix& a, const CMatrix& b);
// A B^*
CMatrix times_adjoint(const CMatrix& a, const CMatrix& b);

// tr(A^* B)
cplx hs_inner(const CMatrix& a, const CMatrix& b);
double hs_norm(const CMatrix& a);
double max_abs(const CMatrix& a);

// [A, B] = AB - BA
CMatrix commutator(const CMatrix& a, const CMatrix& b);

// (A + A^*) / 2
CMatrix hermitian_part(const CMatrix& a);

// Column-stacking: entry (i, j) lands at index i + j*n.
std::vector<cplx> vectorize(const CMatrix& a);
CMatrix unvectorize(std::span<const cplx> v, std::size_t n);

// Block-diagonal embedding of square blocks.
CMatrix block_diagonal(std::span<const CMatrix> blocks);

class RMatrix {
 public:
  RMatrix() = default;
  RMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::vector<double> matvec(const RMatrix& a, std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

}  // namespace ncot
