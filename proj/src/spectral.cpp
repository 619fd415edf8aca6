#include "ncot/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "ncot/errors.hpp"
#include "ncot/superoperator.hpp"

namespace ncot {

// ---------------------------------------------------------------------------
// HermitianMatrix

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  if (!m.square()) throw DimensionError("HermitianMatrix: input is not square");
  m_ = hermitian_part(m);
}

HermitianMatrix operator+(const HermitianMatrix& a, const HermitianMatrix& b) {
  return HermitianMatrix(a.matrix() + b.matrix());
}
HermitianMatrix operator-(const HermitianMatrix& a, const HermitianMatrix& b) {
  return HermitianMatrix(a.matrix() - b.matrix());
}
HermitianMatrix operator*(double s, const HermitianMatrix& a) {
  return HermitianMatrix(s * a.matrix());
}

CMatrix SpectralDecomposition::reconstruct() const {
  const std::size_t n = eigenvalues.size();
  CMatrix scaled = eigenvectors;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scaled(i, j) *= eigenvalues[j];
  return times_adjoint(scaled, eigenvectors);
}

// ---------------------------------------------------------------------------
// Jacobi eigensolver

namespace {

double frobenius(const CMatrix& a) { return hs_norm(a); }

double off_diagonal_norm(const CMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

SpectralDecomposition eig(const HermitianMatrix& input, const EigOptions& opts) {
  const std::size_t n = input.n();
  const auto& k = kernels::active();
  CMatrix a = input.matrix();
  // Rows of w are the eigenvectors; transposed at the end.
  CMatrix w = CMatrix::identity(n);

  const double scale = frobenius(a);
  const double target = opts.off_diagonal_tol * scale;
  const double negligible = 1e-18 * scale;

  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep++ >= opts.max_sweeps) {
      std::ostringstream msg;
      msg << "eig: Jacobi did not converge in " << opts.max_sweeps
          << " sweeps (off-diagonal norm " << off_diagonal_norm(a) << ", n = " << n << ")";
      throw ConvergenceError(msg.str());
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        const double r = std::abs(apq);
        if (r <= negligible) continue;
        const cplx phase = apq / r;  // e^{i phi}
        const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * r);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const double app = a(p, p).real() - t * r;
        const double aqq = a(q, q).real() + t * r;

        // A <- J^* A J with J = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q).
        k.crot(n, a.row(p), a.row(q), c, -s * phase, s, c * phase);
        const cplx cphase = std::conj(phase);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx xp = a(i, p);
          const cplx xq = a(i, q);
          a(i, p) = c * xp - s * cphase * xq;
          a(i, q) = s * xp + c * cphase * xq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = app;
        a(q, q) = aqq;

        // V <- V J, stored transposed.
        k.crot(n, w.row(p), w.row(q), c, -s * cphase, s, c * cphase);
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = CMatrix(n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.eigenvalues[col] = a(src, src).real();
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, col) = w(src, i);
  }
  return out;
}

RealSpectralDecomposition eig_symmetric(const RMatrix& a, const EigOptions& opts) {
  if (a.rows() != a.cols()) throw DimensionError("eig_symmetric: matrix not square");
  CMatrix c(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
  // Real input keeps every rotation phase at +-1, so the eigenvectors stay real.
  const SpectralDecomposition s = eig(HermitianMatrix(c), opts);
  RealSpectralDecomposition out;
  out.eigenvalues = s.eigenvalues;
  out.eigenvectors = RMatrix(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out.eigenvectors(i, j) = s.eigenvectors(i, j).real();
  return out;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(const CMatrix& m) {
  HermitianMatrix h(m);
  SpectralDecomposition s = eig(h);
  double tr = std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw DomainError("DensityMatrix: trace must be positive and finite");
  }
  // Input that is already unit trace up to rounding is kept bit-for-bit, so
  // rebuilding a stored density reproduces it exactly.
  if (std::abs(tr - 1.0) <= 1e-14) tr = 1.0;
  bool clamped = false;
  for (double& l : s.eigenvalues) {
    l /= tr;
    if (l < kEigenvalueFloor) {
      std::ostringstream msg;
      msg << "DensityMatrix: eigenvalue " << l << " below floor " << kEigenvalueFloor;
      throw DomainError(msg.str());
    }
    if (l < 0.0) {
      l = 0.0;
      clamped = true;
    }
  }
  if (clamped) {
    const double renorm = std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0);
    for (double& l : s.eigenvalues) l /= renorm;
    base_ = HermitianMatrix(s.reconstruct());
  } else {
    base_ = HermitianMatrix((1.0 / tr) * h.matrix());
  }
  spectrum_ = std::move(s);
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t n) {
  return DensityMatrix(CMatrix::identity(n));
}

// ---------------------------------------------------------------------------
// Scalar kernels

double log_mean(double s, double t) {
  if (!(s > 0.0) || !(t > 0.0)) return 0.0;
  if (s == t) return s;
  const double d = (t - s) / s;
  if (std::abs(t - s) < 1e-8 * std::max(s, t)) {
    return s * (1.0 + d / 2.0 - d * d / 12.0);
  }
  return s * d / std::log1p(d);
}

double log_mean_partial(double s, double t) {
  if (!(t > 0.0)) return 0.0;
  if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
  const double eps = 1.0 - t / s;
  if (std::abs(eps) < 1e-4) return 0.5 - eps / 6.0 - eps * eps / 24.0;
  const double l = -std::log1p(-eps);  // log s - log t
  return (l - eps) / (l * l);
}

double log_mean_divided_difference(double a, double b, double c) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (std::abs(a - b) <= 1e-6 * scale || scale == 0.0) {
    return log_mean_partial(0.5 * (a + b), c);
  }
  return (log_mean(a, c) - log_mean(b, c)) / (a - b);
}

TwoVariableKernel log_mean_kernel() { return {"log_mean", log_mean}; }

TwoVariableKernel dlog_kernel() {
  return {"dlog", [](double s, double t) {
            if (!(s > 0.0) || !(t > 0.0)) return std::numeric_limits<double>::infinity();
            return 1.0 / log_mean(s, t);
          }};
}

TwoVariableKernel quantum_derivative_kernel(std::function<double(double)> f,
                                            std::function<double(double)> fprime,
                                            std::string fname) {
  return {"quantum_derivative_of(" + fname + ")",
          [f = std::move(f), fp = std::move(fprime)](double s, double t) {
            const double scale = std::max({std::abs(s), std::abs(t), 1e-300});
            if (std::abs(s - t) <= 1e-8 * scale) return fp(0.5 * (s + t));
            return (f(s) - f(t)) / (s - t);
          }};
}

// ---------------------------------------------------------------------------
// Functional calculus

HermitianMatrix func_calc(const SpectralDecomposition& s, const std::function<double(double)>& f) {
  std::vector<double> values(s.n());
  for (std::size_t i = 0; i < s.n(); ++i) {
    values[i] = f(s.eigenvalues[i]);
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "func_calc: function undefined at eigenvalue " << s.eigenvalues[i];
      throw DomainError(msg.str());
    }
  }
  SpectralDecomposition mapped{std::move(values), s.eigenvectors};
  return HermitianMatrix(mapped.reconstruct());
}

HermitianMatrix func_calc(const HermitianMatrix& a, const std::function<double(double)>& f) {
  return func_calc(eig(a), f);
}

CMatrix schur_apply(const SpectralDecomposition& a, const TwoVariableKernel& f, const CMatrix& h) {
  const std::size_t n = a.n();
  if (h.rows() != n || h.cols() != n) throw DimensionError("schur_apply: dimension mismatch");
  const CMatrix& u = a.eigenvectors;
  CMatrix ht = adjoint_times(u, h * u);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ht(i, j) *= f(a.eigenvalues[i], a.eigenvalues[j]);
  return times_adjoint(u * ht, u);
}

CMatrix schur_apply(const HermitianMatrix& a, const TwoVariableKernel& f, const CMatrix& h) {
  return schur_apply(eig(a), f, h);
}

CMatrix apply_mult_op(const SpectralDecomposition& p, const CMatrix& h) {
  std::vector<double> lam(p.eigenvalues);
  for (double& l : lam) l = std::max(l, 0.0);
  const std::size_t n = p.n();
  const CMatrix& u = p.eigenvectors;
  CMatrix ht = adjoint_times(u, h * u);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ht(i, j) *= log_mean(lam[i], lam[j]);
  return times_adjoint(u * ht, u);
}

Superoperator mult_op(const HermitianMatrix& p) {
  const SpectralDecomposition s = eig(p);
  return Superoperator::from_map(p.n(), [&](const CMatrix& h) { return apply_mult_op(s, h); });
}

HermitianMatrix dlog_solve(const HermitianMatrix& t, const HermitianMatrix& s) {
  if (t.n() != s.n()) throw DimensionError("dlog_solve: dimension mismatch");
  const SpectralDecomposition st = eig(t);
  if (st.eigenvalues.front() <= kDlogThreshold) {
    std::ostringstream msg;
    msg << "dlog_solve: eigenvalue " << st.eigenvalues.front() << " of t is not above "
        << kDlogThreshold;
    throw SingularityError(msg.str());
  }
  const std::size_t n = t.n();
  const CMatrix& u = st.eigenvectors;
  CMatrix x = adjoint_times(u, s.matrix() * u);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x(i, j) /= log_mean(st.eigenvalues[i], st.eigenvalues[j]);
  return HermitianMatrix(times_adjoint(u * x, u));
}

HermitianMatrix positive_part(const HermitianMatrix& x) {
  return func_calc(x, [](double l) { return std::max(l, 0.0); });
}

}  // namespace ncot
