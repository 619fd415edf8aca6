#include <cmath>

#include "doctest.h"
#include "ncot/errors.hpp"
#include "ncot/random.hpp"
#include "ncot/spectral.hpp"
#include "ncot/superoperator.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace ncot;
using test::diff_norm;

namespace {

// int_0^1 1^a 2^(1-a) da = 1 / log 2, frozen from oracle::integrate (checked below).
constexpr double kLogMean12 = 1.4426950408889634;

}  // namespace

TEST_CASE("frozen log-mean value matches the quadrature oracle") {
  const double q = oracle::integrate([](double a) { return std::pow(2.0, 1.0 - a); }, 0.0, 1.0, 1e-15);
  CHECK(q == doctest::Approx(kLogMean12).epsilon(1e-13));
}

TEST_CASE("eig: diagonal, identity and Pauli-x") {
  SUBCASE("diag(3,1)") {
    const SpectralDecomposition s = eig(HermitianMatrix(test::diag({3.0, 1.0})));
    CHECK(s.eigenvalues[0] == doctest::Approx(1.0));
    CHECK(s.eigenvalues[1] == doctest::Approx(3.0));
    CHECK(std::abs(s.eigenvectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(s.eigenvectors(0, 1)) == doctest::Approx(1.0));
  }
  SUBCASE("identity") {
    const SpectralDecomposition s = eig(HermitianMatrix::identity(4));
    for (double l : s.eigenvalues) CHECK(l == doctest::Approx(1.0));
  }
  SUBCASE("pauli x") {
    const SpectralDecomposition s = eig(HermitianMatrix(test::pauli_x()));
    CHECK(s.eigenvalues[0] == doctest::Approx(-1.0));
    CHECK(s.eigenvalues[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("eig: reconstruction and unitarity on random Hermitian matrices") {
  Rng rng = make_rng(1);
  for (std::size_t n = 1; n <= 12; ++n) {
    const HermitianMatrix a = random_hermitian(rng, n);
    const SpectralDecomposition s = eig(a);
    CAPTURE(n);
    CHECK(diff_norm(s.reconstruct(), a.matrix()) <= 1e-10 * hs_norm(a.matrix()));
    CHECK(diff_norm(adjoint_times(s.eigenvectors, s.eigenvectors), CMatrix::identity(n)) <= 1e-10);
    for (std::size_t i = 1; i < n; ++i) CHECK(s.eigenvalues[i - 1] <= s.eigenvalues[i]);
  }
}

TEST_CASE("eig: degenerate spectrum and the zero matrix") {
  const SpectralDecomposition z = eig(HermitianMatrix::zero(3));
  for (double l : z.eigenvalues) CHECK(l == 0.0);
  CMatrix m = CMatrix::identity(4);
  m(0, 3) = cplx(0.0, 1e-3);
  m(3, 0) = cplx(0.0, -1e-3);
  const SpectralDecomposition s = eig(HermitianMatrix(m));
  CHECK(s.eigenvalues.front() == doctest::Approx(1.0 - 1e-3));
  CHECK(s.eigenvalues.back() == doctest::Approx(1.0 + 1e-3));
}

TEST_CASE("eig: sweep cap produces a diagnostic") {
  Rng rng = make_rng(5);
  EigOptions opts;
  opts.max_sweeps = 0;
  CHECK_THROWS_AS(eig(random_hermitian(rng, 4), opts), ConvergenceError);
}

TEST_CASE("func_calc examples") {
  Rng rng = make_rng(2);
  const HermitianMatrix a = random_hermitian(rng, 4);
  CHECK(diff_norm(func_calc(a, [](double x) { return x; }).matrix(), a.matrix()) <= 1e-12);

  const HermitianMatrix l = func_calc(HermitianMatrix(test::diag({1.0, std::exp(1.0)})),
                                      [](double x) { return std::log(x); });
  CHECK(diff_norm(l.matrix(), test::diag({0.0, 1.0})) <= 1e-14);

  const std::size_t n = 3;
  const HermitianMatrix mixed = (1.0 / n) * HermitianMatrix::identity(n);
  const HermitianMatrix xlogx =
      func_calc(mixed, [](double x) { return x > 0 ? x * std::log(x) : 0.0; });
  CHECK(diff_norm(xlogx.matrix(), (-std::log(3.0) / 3.0) * CMatrix::identity(n)) <= 1e-14);
}

TEST_CASE("func_calc reports the offending eigenvalue") {
  const HermitianMatrix a(test::diag({0.0, 2.0}));
  try {
    func_calc(a, [](double x) { return std::log(x); });
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("eigenvalue 0") != std::string::npos);
  }
}

TEST_CASE("log_mean boundary values and near-diagonal branch") {
  CHECK(log_mean(2.5, 2.5) == 2.5);
  CHECK(log_mean(1.0, 0.0) == 0.0);
  CHECK(log_mean(0.0, 1.0) == 0.0);
  CHECK(log_mean(1.0, 2.0) == doctest::Approx(kLogMean12).epsilon(1e-15));
  // Both branches agree across the switch at |s - t| = 1e-8 max(s, t).
  const double s = 0.7;
  for (double rel : {5e-9, 2e-8, 1e-7}) {
    const double t = s * (1.0 + rel);
    CHECK(log_mean(s, t) == doctest::Approx(oracle::lm_from_integral(s, t)).epsilon(1e-14));
  }
  CHECK(dlog_kernel()(1.0, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("log_mean partial derivative and divided difference against finite differences") {
  for (auto [s, t] : {std::pair{0.3, 0.9}, {1.0, 1.00001}, {2.0, 1e-6}, {0.5, 0.5}, {1e-3, 4.0}}) {
    const double h = 1e-6 * s;
    const double fd = (log_mean(s + h, t) - log_mean(s - h, t)) / (2 * h);
    CAPTURE(s);
    CAPTURE(t);
    CHECK(log_mean_partial(s, t) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(log_mean_divided_difference(0.2, 0.6, 0.4) ==
        doctest::Approx((log_mean(0.2, 0.4) - log_mean(0.6, 0.4)) / (0.2 - 0.6)));
  CHECK(log_mean_divided_difference(0.4, 0.4, 0.4) == doctest::Approx(0.5));
}

TEST_CASE("schur_apply examples") {
  Rng rng = make_rng(3);
  const CMatrix h = random_gaussian(rng, 3, 3);
  const double c = 0.37;
  CHECK(diff_norm(schur_apply(c * HermitianMatrix::identity(3), log_mean_kernel(), h), c * h) <= 1e-14);

  const CMatrix out = schur_apply(HermitianMatrix(test::diag({1.0, 2.0})), log_mean_kernel(), test::pauli_x());
  CHECK(std::abs(out(0, 0)) <= 1e-15);
  CHECK(std::abs(out(1, 1)) <= 1e-15);
  CHECK(out(0, 1).real() == doctest::Approx(kLogMean12).epsilon(1e-14));
  CHECK(out(1, 0).real() == doctest::Approx(kLogMean12).epsilon(1e-14));

  CHECK(diff_norm(schur_apply(HermitianMatrix::identity(3), dlog_kernel(), h), h) <= 1e-14);
}

TEST_CASE("schur_apply: contraction and Hermiticity preservation") {
  Rng rng = make_rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const DensityMatrix p = random_density(rng, n);
    const HermitianMatrix h = random_hermitian(rng, n);
    const CMatrix out = schur_apply(p.base(), log_mean_kernel(), h.matrix());
    double fmax = 0.0;
    for (double a : p.spectrum().eigenvalues)
      for (double b : p.spectrum().eigenvalues) fmax = std::max(fmax, std::abs(log_mean(a, b)));
    CHECK(hs_norm(out) <= fmax * hs_norm(h.matrix()) * (1 + 1e-12));
    CHECK(diff_norm(out, out.adjoint()) <= 1e-12 * hs_norm(out));
  }
}

TEST_CASE("mult_op examples") {
  const std::size_t n = 3;
  const Superoperator m = mult_op((1.0 / n) * HermitianMatrix::identity(n));
  CHECK(diff_norm(m.matrix(), (1.0 / n) * CMatrix::identity(n * n)) <= 1e-14);

  const Superoperator pure = mult_op(HermitianMatrix(test::diag({1.0, 0.0})));
  Rng rng = make_rng(6);
  const CMatrix h = random_gaussian(rng, 2, 2);
  const CMatrix out = pure.apply(h);
  CHECK(std::abs(out(0, 1)) == 0.0);
  CHECK(std::abs(out(1, 0)) == 0.0);
  CHECK(std::abs(out(1, 1)) == 0.0);
  CHECK(std::abs(out(0, 0) - h(0, 0)) <= 1e-15);
}

TEST_CASE("mult_op: operator norm equals the largest eigenvalue") {
  Rng rng = make_rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const HermitianMatrix x = (0.5 + trial) * random_density(rng, n).base();
    const Superoperator m = mult_op(x);
    CHECK(m.self_adjoint_defect() <= 1e-12);
    const double lmax = eig(x).eigenvalues.back();
    CHECK(std::abs(m.opnorm() - lmax) <= 1e-9 * std::max(1.0, lmax));
    CHECK(m.eigh().eigenvalues.front() >= -1e-12);
  }
}

TEST_CASE("mult_op agrees with quadrature of p^a h p^(1-a)") {
  Rng rng = make_rng(8);
  for (std::size_t n = 2; n <= 6; ++n) {
    const DensityMatrix p = random_density(rng, n);
    const CMatrix h = random_gaussian(rng, n, n);
    const CMatrix quad = oracle::power_mean_quadrature(p.base(), h);
    CAPTURE(n);
    CHECK(diff_norm(apply_mult_op(p.spectrum(), h), quad) <= 1e-9);
    CHECK(diff_norm(mult_op(p.base()).apply(h), quad) <= 1e-9);
  }
}

TEST_CASE("mult_op reduces to multiplication on commuting arguments") {
  Rng rng = make_rng(9);
  const DensityMatrix p = random_density(rng, 4);
  const HermitianMatrix h = func_calc(p.spectrum(), [](double x) { return std::sin(5 * x) + x * x; });
  const CMatrix out = apply_mult_op(p.spectrum(), h.matrix());
  CHECK(diff_norm(out, p.matrix() * h.matrix()) <= 1e-10);
}

TEST_CASE("dlog_solve examples") {
  Rng rng = make_rng(10);
  const HermitianMatrix s = random_hermitian(rng, 3);
  CHECK(diff_norm(dlog_solve(HermitianMatrix::identity(3), s).matrix(), s.matrix()) <= 1e-14);
  const double c = 2.5;
  CHECK(diff_norm(dlog_solve(c * HermitianMatrix::identity(3), s).matrix(), (1.0 / c) * s.matrix()) <= 1e-14);

  const HermitianMatrix t(test::diag({1.0, 2.0}));
  const HermitianMatrix x = dlog_solve(t, HermitianMatrix(test::pauli_x()));
  CHECK(x(0, 1).real() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(std::abs(x(0, 0)) <= 1e-15);
  // The forward integral of the frozen answer reproduces s.
  CMatrix expected(2);
  expected(0, 1) = std::log(2.0);
  expected(1, 0) = std::log(2.0);
  CHECK(diff_norm(oracle::power_mean_quadrature(t, expected), test::pauli_x()) <= 1e-11);
}

TEST_CASE("dlog_solve: singular input") {
  CHECK_THROWS_AS(dlog_solve(HermitianMatrix(test::diag({1.0, 0.0})), HermitianMatrix::identity(2)),
                  SingularityError);
  CHECK_THROWS_AS(dlog_solve(HermitianMatrix(test::diag({1.0, 1e-13})), HermitianMatrix::identity(2)),
                  SingularityError);
}

TEST_CASE("dlog_solve round trip and trace identity") {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const DensityMatrix t = random_density(rng, n);
    const HermitianMatrix s = random_hermitian(rng, n);
    const HermitianMatrix x = dlog_solve(t.base(), s);
    CHECK(diff_norm(apply_mult_op(t.spectrum(), x.matrix()), s.matrix()) <= 1e-9 * hs_norm(s.matrix()));
    CHECK(std::abs((t.matrix() * x.matrix()).trace().real() - s.trace()) <= 1e-10);
  }
}

TEST_CASE("positive_part examples and nearest-point property") {
  Rng rng = make_rng(12);
  const DensityMatrix p = random_density(rng, 3);
  CHECK(diff_norm(positive_part(p.base()).matrix(), p.matrix()) <= 1e-14);
  CHECK(diff_norm(positive_part(HermitianMatrix(test::diag({1.0, -1.0}))).matrix(), test::diag({1.0, 0.0})) <=
        1e-15);

  const HermitianMatrix x = random_hermitian(rng, 4);
  const double dist = diff_norm(x.matrix(), positive_part(x).matrix());
  for (int i = 0; i < 100; ++i) {
    const CMatrix y = random_gaussian(rng, 4, 4);
    const CMatrix psd = times_adjoint(y, y);
    CHECK(dist <= diff_norm(x.matrix(), psd) + 1e-12);
  }
}

TEST_CASE("DensityMatrix construction invariants") {
  const DensityMatrix d(test::diag({3.0, 1.0}));
  CHECK(d.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.min_eigenvalue() == doctest::Approx(0.25));
  const DensityMatrix clamped(test::diag({1.0, -1e-12}));
  CHECK(clamped.min_eigenvalue() == 0.0);
  CHECK_THROWS_AS(DensityMatrix(test::diag({1.0, -1e-3})), DomainError);
  CHECK_THROWS_AS(DensityMatrix(CMatrix(2)), DomainError);
}
