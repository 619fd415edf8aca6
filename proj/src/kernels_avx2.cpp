// Compiled with -mavx2 -mfma on x86-64; the table is only handed out after a
// runtime CPU check, so the rest of the library stays baseline x86-64.

#include "ncot/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace ncot::kernels {
namespace {

inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

// Two complex products s * v packed as [re0, im0, re1, im1].
inline __m256d cmul(__m256d sre, __m256d sim, __m256d v) {
  const __m256d swapped = _mm256_permute_pd(v, 0b0101);
  return _mm256_fmaddsub_pd(sre, v, _mm256_mul_pd(sim, swapped));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void caxpy(std::size_t n, cplx a, const cplx* x, cplx* y) {
  const __m256d are = _mm256_set1_pd(a.real());
  const __m256d aim = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    _mm256_storeu_pd(dp(y + i), _mm256_add_pd(yv, cmul(are, aim, xv)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// acc_a lanes: [xr*yr, xi*yi, ...]; acc_b lanes: [xr*yi, xi*yr, ...]
inline void dot_accumulate(std::size_t n, const cplx* x, const cplx* y, __m256d& acc_a,
                           __m256d& acc_b, std::size_t& i) {
  acc_a = _mm256_setzero_pd();
  acc_b = _mm256_setzero_pd();
  for (i = 0; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    acc_a = _mm256_fmadd_pd(xv, yv, acc_a);
    acc_b = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), acc_b);
  }
}

cplx cdotu(std::size_t n, const cplx* x, const cplx* y) {
  __m256d acc_a, acc_b;
  std::size_t i;
  dot_accumulate(n, x, y, acc_a, acc_b, i);
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  double re = hsum(_mm256_mul_pd(acc_a, sign));
  double im = hsum(acc_b);
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
  }
  return {re, im};
}

cplx cdotc(std::size_t n, const cplx* x, const cplx* y) {
  __m256d acc_a, acc_b;
  std::size_t i;
  dot_accumulate(n, x, y, acc_a, acc_b, i);
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  double re = hsum(acc_a);
  double im = hsum(_mm256_mul_pd(acc_b, sign));
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void crot(std::size_t n, cplx* x, cplx* y, cplx a, cplx b, cplx c, cplx d) {
  const __m256d are = _mm256_set1_pd(a.real()), aim = _mm256_set1_pd(a.imag());
  const __m256d bre = _mm256_set1_pd(b.real()), bim = _mm256_set1_pd(b.imag());
  const __m256d cre = _mm256_set1_pd(c.real()), cim = _mm256_set1_pd(c.imag());
  const __m256d dre = _mm256_set1_pd(d.real()), dim = _mm256_set1_pd(d.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    const __m256d xn = _mm256_add_pd(cmul(are, aim, xv), cmul(bre, bim, yv));
    const __m256d yn = _mm256_add_pd(cmul(cre, cim, xv), cmul(dre, dim, yv));
    _mm256_storeu_pd(dp(x + i), xn);
    _mm256_storeu_pd(dp(y + i), yn);
  }
  for (; i < n; ++i) {
    const cplx xi = x[i];
    const cplx yi = y[i];
    x[i] = a * xi + b * yi;
    y[i] = c * xi + d * yi;
  }
}

void cscale_real(std::size_t n, const double* w, const cplx* x, cplx* y) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d w2 = _mm_loadu_pd(w + i);
    const __m256d ww = _mm256_permute4x64_pd(_mm256_castpd128_pd256(w2), 0x50);
    _mm256_storeu_pd(dp(y + i), _mm256_mul_pd(ww, _mm256_loadu_pd(dp(x + i))));
  }
  for (; i < n; ++i) y[i] = w[i] * x[i];
}

double ddot(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void daxpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable* avx2_table_unchecked() {
  static const KernelTable table{Isa::Avx2, "avx2", caxpy,       cdotu, cdotc,
                                 crot,      cscale_real, ddot, daxpy};
  return &table;
}

}  // namespace ncot::kernels

#else

namespace ncot::kernels {
const KernelTable* avx2_table_unchecked() { return nullptr; }
}  // namespace ncot::kernels

#endif
