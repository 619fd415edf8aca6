#pragma once

// Data-parallel inner loops shared by the dense linear algebra.
//
// Every kernel has a scalar reference implementation. On x86-64 hosts with
// AVX2+FMA an intrinsics variant is selected at first use; the environment
// variable NCOT_SIMD=scalar forces the reference table. The two tables are
// equivalence-tested in tests/test_kernels.cpp.

#include <complex>
#include <cstddef>
#include <string_view>

namespace ncot {

using cplx = std::complex<double>;

namespace kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  // y += a * x
  void (*caxpy)(std::size_t n, cplx a, const cplx* x, cplx* y);
  // sum x_i * y_i
  cplx (*cdotu)(std::size_t n, const cplx* x, const cplx* y);
  // sum conj(x_i) * y_i
  cplx (*cdotc)(std::size_t n, const cplx* x, const cplx* y);
  // (x, y) <- (a x + b y, c x + d y), elementwise
  void (*crot)(std::size_t n, cplx* x, cplx* y, cplx a, cplx b, cplx c, cplx d);
  // y_i = w_i * x_i with real weights
  void (*cscale_real)(std::size_t n, const double* w, const cplx* x, cplx* y);
  double (*ddot)(std::size_t n, const double* x, const double* y);
  // y += a * x
  void (*daxpy)(std::size_t n, double a, const double* x, double* y);
};

const KernelTable& scalar_table();

// nullptr when the host or the build lacks AVX2+FMA.
const KernelTable* avx2_table();

// The table used by the library. Resolved once; thread-safe.
const KernelTable& active();

// Overrides the active table (tests and benchmarks). Returns false if the
// requested ISA is unavailable on this host.
bool select(Isa isa);

}  // namespace kernels
}  // namespace ncot
