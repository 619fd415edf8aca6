#pragma once

// Hermitian spectral calculus on (M_n(C), tr): eigendecomposition, one- and
// two-variable functional calculus, the logarithmic-mean multiplication
// operator and its inverse, the derivative of the matrix logarithm.

#include <functional>
#include <string>
#include <vector>

#include "ncot/matrix.hpp"

namespace ncot {

class Superoperator;

/// Hermitian n x n matrix. Construction symmetrizes the input, so every
/// instance satisfies a_ij == conj(a_ji) exactly.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMatrix& m);

  static HermitianMatrix zero(std::size_t n) { return HermitianMatrix(CMatrix(n)); }
  static HermitianMatrix identity(std::size_t n) { return HermitianMatrix(CMatrix::identity(n)); }
  static HermitianMatrix diagonal(std::span<const double> d) {
    return HermitianMatrix(CMatrix::diagonal(d));
  }

  std::size_t n() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  operator const CMatrix&() const { return m_; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }

 private:
  CMatrix m_;
};

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b);
HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b);
HermitianMatrix operator*(double s, const HermitianMatrix& a);

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // ascending
  CMatrix eigenvectors;             // unitary, eigenvectors in columns

  std::size_t n() const { return eigenvalues.size(); }
  CMatrix reconstruct() const;
};

struct EigOptions {
  int max_sweeps = 100;
  double off_diagonal_tol = 1e-13;  // relative to the Frobenius norm
};

/// Cyclic complex Jacobi. Throws ConvergenceError after max_sweeps.
SpectralDecomposition eig(const HermitianMatrix& a, const EigOptions& opts = {});

// Real symmetric variant; eigenvectors are returned as the columns of a real
// matrix. Used for operators expressed in a real Hermitian basis.
struct RealSpectralDecomposition {
  std::vector<double> eigenvalues;
  RMatrix eigenvectors;
};
RealSpectralDecomposition eig_symmetric(const RMatrix& a, const EigOptions& opts = {});

/// Positive semidefinite, unit-trace matrix. Construction renormalizes the
/// trace and clamps eigenvalues in [-1e-10, 0) to zero; anything more
/// negative is rejected with DomainError.
class DensityMatrix {
 public:
  static constexpr double kEigenvalueFloor = -1e-10;

  DensityMatrix() = default;
  explicit DensityMatrix(const CMatrix& m);
  explicit DensityMatrix(const HermitianMatrix& m) : DensityMatrix(m.matrix()) {}

  static DensityMatrix maximally_mixed(std::size_t n);

  std::size_t n() const { return base_.n(); }
  const HermitianMatrix& base() const { return base_; }
  const CMatrix& matrix() const { return base_.matrix(); }
  const SpectralDecomposition& spectrum() const { return spectrum_; }
  double min_eigenvalue() const { return spectrum_.eigenvalues.front(); }

 private:
  HermitianMatrix base_;
  SpectralDecomposition spectrum_;
};

// Logarithmic mean (s - t) / (log s - log t), extended by continuity:
// L(s, s) = s and L(s, 0) = L(0, t) = 0.
double log_mean(double s, double t);

// d/ds L(s, t).
double log_mean_partial(double s, double t);

// First divided difference of L in its first slot with the second slot held
// at c: (L(a, c) - L(b, c)) / (a - b), equal to log_mean_partial(a, c) when a == b.
double log_mean_divided_difference(double a, double b, double c);

/// Real function of two nonnegative reals, used as a Schur multiplier in the
/// eigenbasis of a positive matrix.
struct TwoVariableKernel {
  std::string name;
  std::function<double(double, double)> eval;

  double operator()(double s, double t) const { return eval(s, t); }
};

TwoVariableKernel log_mean_kernel();
// D log(s, t) = 1 / L(s, t); infinite when either argument is <= 0.
TwoVariableKernel dlog_kernel();
// Divided difference (f(s) - f(t)) / (s - t) with diagonal f'(s).
TwoVariableKernel quantum_derivative_kernel(std::function<double(double)> f,
                                            std::function<double(double)> fprime,
                                            std::string fname);

/// U diag(f(lambda)) U^*. Throws DomainError naming the first eigenvalue at
/// which f is not finite.
HermitianMatrix func_calc(const HermitianMatrix& a, const std::function<double(double)>& f);
HermitianMatrix func_calc(const SpectralDecomposition& s, const std::function<double(double)>& f);

/// (L_a (x) R_a)(f) applied to h: U [f(l_i, l_j) * (U^* h U)_ij] U^*.
CMatrix schur_apply(const HermitianMatrix& a, const TwoVariableKernel& f, const CMatrix& h);
CMatrix schur_apply(const SpectralDecomposition& a, const TwoVariableKernel& f, const CMatrix& h);

/// M_p = (L_p (x) R_p)(log mean) as a superoperator.
Superoperator mult_op(const HermitianMatrix& p);
CMatrix apply_mult_op(const SpectralDecomposition& p, const CMatrix& h);

/// Unique X with  int_0^1 t^a X t^(1-a) da = s. Requires every eigenvalue of
/// t to exceed kDlogThreshold; throws SingularityError otherwise.
inline constexpr double kDlogThreshold = 1e-12;
HermitianMatrix dlog_solve(const HermitianMatrix& t, const HermitianMatrix& s);

/// Hilbert-Schmidt projection onto the positive semidefinite cone.
HermitianMatrix positive_part(const HermitianMatrix& x);

}  // namespace ncot
