#include "ncot/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>

#include "ncot/bundle.hpp"
#include "ncot/entropy.hpp"
#include "ncot/errors.hpp"
#include "ncot/random.hpp"
#include "ncot/transport.hpp"

namespace ncot {

namespace {

class Recorder {
 public:
  Recorder(std::string suite, std::uint64_t seed, std::uint64_t stream_base, std::ostream& out,
           CheckSummary& summary)
      : suite_(std::move(suite)), seed_(seed), stream_(stream_base), out_(out), summary_(summary) {}

  // A fresh generator per invariant, so adding or reordering invariants in one
  // suite never shifts the samples of another.
  Rng rng() { return make_rng(seed_, stream_++); }

  void at_most(const std::string& name, double value, double bound) {
    emit(name, value, "<=", bound, value <= bound);
  }
  void above(const std::string& name, double value, double bound) { emit(name, value, ">", bound, value > bound); }

 private:
  void emit(const std::string& name, double value, const char* rel, double bound, bool pass) {
    CheckLine line{suite_, name, value, rel, bound, pass};
    out_ << format_check_line(line) << '\n';
    out_.flush();
    summary_.lines.push_back(std::move(line));
  }

  std::string suite_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::ostream& out_;
  CheckSummary& summary_;
};

double rel_diff(const CMatrix& a, const CMatrix& b) { return hs_norm(a - b) / std::max(1.0, hs_norm(b)); }

// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - z);
    w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
}

// int_0^1 p^a h p^(1-a) da, composite Gauss-Legendre.
CMatrix power_mean_quadrature(const HermitianMatrix& p, const CMatrix& h) {
  const SpectralDecomposition s = eig(p);
  std::vector<double> x, w;
  gauss_legendre(20, x, w);
  const int panels = 16;
  CMatrix acc(p.n());
  for (int k = 0; k < panels; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double a = (k + x[i]) / panels;
      const auto pw = [&](double e) {
        return func_calc(s, [e](double l) { return l > 0.0 ? std::pow(l, e) : 0.0; }).matrix();
      };
      acc.add_scaled(w[i] / panels, pw(a) * h * pw(1.0 - a));
    }
  }
  return acc;
}

Derivation block_derivation(Rng& rng) {
  const CMatrix t1[] = {random_hermitian(rng, 2).matrix(), random_hermitian(rng, 2).matrix()};
  const CMatrix t2[] = {random_hermitian(rng, 2).matrix(), random_hermitian(rng, 2).matrix()};
  return Derivation(4, {HermitianMatrix(block_diagonal(t1)), HermitianMatrix(block_diagonal(t2))});
}

DensityMatrix block_density(Rng& rng, double mass_first) {
  const CMatrix blocks[] = {mass_first * random_density(rng, 2).matrix(),
                            (1.0 - mass_first) * random_density(rng, 2).matrix()};
  return DensityMatrix(block_diagonal(blocks));
}

VerticalGradient random_vertical(Rng& rng, std::size_t k, std::size_t n, std::size_t m) {
  std::uniform_real_distribution<double> unif(0.3, 2.0);
  std::vector<double> weights;
  std::vector<Derivation> fibers;
  for (std::size_t j = 0; j < k; ++j) {
    weights.push_back(unif(rng));
    fibers.push_back(random_derivation(rng, n, m));
  }
  return VerticalGradient(FiniteBase(weights), std::move(fibers));
}

FiberedDensity random_fibered(Rng& rng, const FiniteBase& base, std::size_t n, const std::vector<double>& masses) {
  double z = 0.0;
  for (std::size_t j = 0; j < masses.size(); ++j) z += base.weight(j) * masses[j];
  std::vector<HermitianMatrix> f;
  for (double m : masses) f.push_back((m / z) * random_density(rng, n).base());
  return FiberedDensity(base, std::move(f));
}

std::vector<double> random_masses(Rng& rng, std::size_t k) {
  std::uniform_real_distribution<double> unif(0.3, 2.0);
  std::vector<double> m;
  for (std::size_t j = 0; j < k; ++j) m.push_back(unif(rng));
  return m;
}

void spectral_suite(Recorder& r) {
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const HermitianMatrix a = random_hermitian(rng, 2 + i % 5);
      worst = std::max(worst, rel_diff(eig(a).reconstruct(), a.matrix()));
    }
    r.at_most("eig_reconstruction", worst, 1e-12);
  }
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = 2 + i % 5;
      const DensityMatrix t = random_density(rng, n);
      const HermitianMatrix s = random_hermitian(rng, n);
      const HermitianMatrix x = dlog_solve(t.base(), s);
      worst = std::max(worst, hs_norm(apply_mult_op(t.spectrum(), x.matrix()) - s.matrix()) / hs_norm(s.matrix()));
    }
    r.at_most("dlog_round_trip", worst, 1e-9);
  }
  {
    Rng rng = r.rng();
    const TwoVariableKernel lm = log_mean_kernel();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = 2 + i % 5;
      const DensityMatrix a = random_density(rng, n);
      const CMatrix h = random_gaussian(rng, n, n);
      double fmax = 0.0;
      for (double s : a.spectrum().eigenvalues)
        for (double t : a.spectrum().eigenvalues) fmax = std::max(fmax, std::abs(lm(s, t)));
      const double excess = hs_norm(schur_apply(a.spectrum(), lm, h)) - fmax * hs_norm(h);
      worst = std::max(worst, excess / hs_norm(h));
    }
    r.at_most("schur_contraction_excess", std::max(worst, 0.0), 1e-12);
  }
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const std::size_t n = 2 + i % 5;
      const DensityMatrix p = random_density(rng, n);
      const CMatrix h = random_gaussian(rng, n, n);
      worst = std::max(worst, rel_diff(apply_mult_op(p.spectrum(), h), power_mean_quadrature(p.base(), h)));
    }
    r.at_most("mult_op_vs_quadrature", worst, 1e-9);
  }
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const DensityMatrix p = random_density(rng, 2 + i % 5);
      const CMatrix h = p.matrix() * p.matrix() - 0.3 * p.matrix() + CMatrix::identity(p.n());
      worst = std::max(worst, rel_diff(apply_mult_op(p.spectrum(), h), p.matrix() * h));
    }
    r.at_most("commuting_reduction", worst, 1e-10);
  }
  {
    Rng rng = r.rng();
    const TwoVariableKernel lm = log_mean_kernel();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = 2 + i % 5;
      const DensityMatrix a = random_density(rng, n);
      const HermitianMatrix h = random_hermitian(rng, n);
      const CMatrix out = schur_apply(a.spectrum(), lm, h.matrix());
      worst = std::max(worst, hs_norm(out - out.adjoint()) / hs_norm(h.matrix()));
    }
    r.at_most("hermiticity_preservation", worst, 1e-12);
  }
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const DensityMatrix x = random_density(rng, 2 + i % 3);
      worst = std::max(worst, std::abs(mult_op(x.base()).opnorm() - x.spectrum().eigenvalues.back()));
    }
    r.at_most("mult_op_norm", worst, 1e-8);
  }
}

void derivation_suite(Recorder& r) {
  {
    Rng rng = r.rng();
    double worst_leibniz = 0.0, worst_sym = 0.0, worst_adj = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = 2 + i % 4;
      const Derivation d = random_derivation(rng, n, 1 + i % 3);
      const CMatrix a = random_gaussian(rng, n, n), b = random_gaussian(rng, n, n);
      const auto gab = d.grad(a * b), ga = d.grad(a), gb = d.grad(b), gas = d.grad(a.adjoint());
      std::vector<CMatrix> v;
      for (std::size_t k = 0; k < d.m(); ++k) v.push_back(random_gaussian(rng, n, n));
      const double scale = hs_norm(a) * hs_norm(b);
      for (std::size_t k = 0; k < d.m(); ++k) {
        worst_leibniz = std::max(worst_leibniz, hs_norm(gab[k] - ga[k] * b - a * gb[k]) / scale);
        worst_sym = std::max(worst_sym, hs_norm(gas[k] - ga[k].adjoint()) / hs_norm(a));
      }
      const cplx lhs = tuple_inner(ga, v), rhs = hs_inner(a, d.divergence(v));
      worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    r.at_most("leibniz_rule", worst_leibniz, 1e-10);
    r.at_most("adjoint_symmetry", worst_sym, 1e-12);
    r.at_most("divergence_adjointness", worst_adj, 1e-12);
  }
  {
    Rng rng = r.rng();
    const TwoVariableKernel dlog = dlog_kernel();
    double worst_chain = 0.0, worst_key = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = 2 + i % 3;
      const Derivation d = random_derivation(rng, n, 1 + i % 3);
      const DensityMatrix p = random_density(rng, n);
      const HermitianMatrix lg = func_calc(p.spectrum(), [](double l) { return std::log(l); });
      const auto glog = d.grad(lg.matrix()), gp = d.grad(p.matrix());
      for (std::size_t k = 0; k < d.m(); ++k) {
        worst_chain = std::max(worst_chain, rel_diff(glog[k], schur_apply(p.spectrum(), dlog, gp[k])));
        worst_key = std::max(worst_key, rel_diff(apply_mult_op(p.spectrum(), glog[k]), gp[k]));
      }
    }
    r.at_most("chain_rule_log", worst_chain, 1e-8);
    r.at_most("key_identity", worst_key, 1e-8);
  }
  {
    Rng rng = r.rng();
    double worst_defect = 0.0, most_negative = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Derivation d = random_derivation(rng, 2 + i % 3, 1 + i % 3);
      worst_defect = std::max(worst_defect, d.laplacian().self_adjoint_defect());
      most_negative = std::max(most_negative, -d.laplacian_spectrum().eigenvalues.front());
    }
    r.at_most("laplacian_self_adjoint_defect", worst_defect, 1e-12);
    r.at_most("laplacian_negative_eigenvalue", most_negative, 1e-12);
  }
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const std::size_t n = 2 + i % 3;
      const Derivation d = random_derivation(rng, n, 1 + i % 3);
      const DensityMatrix p = random_density(rng, n);
      for (int k = 0; k <= 10; ++k) worst = std::max(worst, std::abs(heat(d, p, 0.1 * k).matrix().trace().real() - 1.0));
    }
    r.at_most("heat_trace_conservation", worst, 1e-10);
  }
  {
    Rng rng = r.rng();
    double min_eig = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      const std::size_t n = 2 + i % 3;
      const Derivation d = random_derivation(rng, n, 2);
      if (!is_ergodic(d).ergodic) continue;
      const DensityMatrix p = random_density_of_rank(rng, n, 1);
      min_eig = std::min(min_eig, heat(d, p, 0.1).min_eigenvalue());
    }
    r.above("ergodic_heat_min_eigenvalue", min_eig, 0.0);
  }
}

void entropy_suite(Recorder& r) {
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const std::size_t n = 2 + i % 3;
      const DensityMatrix p = random_density(rng, n), q = random_density(rng, n);
      for (int k = 0; k <= 10; ++k) {
        const double t = k / 10.0;
        const DensityMatrix m((1.0 - t) * p.matrix() + t * q.matrix());
        worst = std::max(worst, entropy(m) - (1.0 - t) * entropy(p) - t * entropy(q));
      }
    }
    r.at_most("entropy_convexity_excess", worst, 1e-12);
  }
  {
    Rng rng = r.rng();
    double worst_fd = 0.0, worst_rise = -std::numeric_limits<double>::infinity(), max_diss = -1.0;
    for (int i = 0; i < 10; ++i) {
      const std::size_t n = 2 + i % 3;
      const Derivation d = random_derivation(rng, n, 1 + i % 3);
      const DensityMatrix p = random_density(rng, n);
      const double h = 1e-5, t = 0.1;
      const double fd = (entropy(heat(d, p, t + h)) - entropy(heat(d, p, t - h))) / (2 * h);
      const double diss = entropy_dissipation(d, heat(d, p, t));
      worst_fd = std::max(worst_fd, std::abs(fd - diss));
      max_diss = std::max(max_diss, diss);
      double prev = entropy(p);
      for (int k = 1; k <= 10; ++k) {
        const double e = entropy(heat(d, p, k / 10.0));
        worst_rise = std::max(worst_rise, e - prev);
        prev = e;
      }
    }
    r.at_most("dissipation_identity", worst_fd, 1e-3);
    r.at_most("dissipation_sign", max_diss, 0.0);
    r.at_most("heat_entropy_increase", std::max(worst_rise, 0.0), 1e-12);
  }
  {
    Rng rng = r.rng();
    double worst_rev = 0.0, worst_resolve = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Derivation d = random_derivation(rng, 2, 2);
      const DensityMatrix p = random_density(rng, 2), q = random_density(rng, 2);
      const TransportResult fw = solve_geodesic(d, p, q);
      const TransportResult bw = solve_geodesic(d, q, p);
      const double g = curvature_gap(p, q, fw.path, fw.energy);
      const double scale = std::max(1.0, std::abs(g));
      worst_rev = std::max(worst_rev, std::abs(curvature_gap(q, p, reversed(fw.path), fw.energy) - g) / scale);
      worst_resolve = std::max(worst_resolve, std::abs(curvature_gap(q, p, bw.path, bw.energy) - g) / scale);
    }
    r.at_most("curvature_gap_reversal", worst_rev, 1e-12);
    r.at_most("curvature_gap_reverse_solve", worst_resolve, 1e-4);
  }
}

void transport_suite(Recorder& r) {
  const SolverConfig cfg;
  {
    Rng rng = r.rng();
    double worst_sym = 0.0, worst_upper = 0.0;
    for (int i = 0; i < 5; ++i) {
      const std::size_t n = 2 + i % 2;
      const Derivation d = random_derivation(rng, n, 2);
      const DensityMatrix p = random_density(rng, n), q = random_density(rng, n);
      const TransportResult fw = solve_geodesic(d, p, q, cfg);
      const TransportResult bw = solve_geodesic(d, q, p, cfg);
      worst_sym = std::max(worst_sym, std::abs(fw.distance - bw.distance) / fw.distance);
      const LinearPathResult lin = linear_path(d, p, q, cfg.steps, cfg.feas_tol);
      if (lin.path) worst_upper = std::max(worst_upper, fw.energy - path_energy(d, *lin.path, cfg.feas_tol));
    }
    r.at_most("symmetry_relative", worst_sym, 2e-4);
    r.at_most("linear_path_upper_bound_excess", worst_upper, 1e-9);
  }
  {
    Rng rng = r.rng();
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 5; ++i) {
      const Derivation d = random_derivation(rng, 2, 2);
      const DensityMatrix a = random_density(rng, 2), b = random_density(rng, 2), c = random_density(rng, 2);
      const double ab = solve_geodesic(d, a, b, cfg).distance;
      const double bc = solve_geodesic(d, b, c, cfg).distance;
      const double ac = solve_geodesic(d, a, c, cfg).distance;
      worst = std::max(worst, ac - ab - bc);
    }
    r.at_most("triangle_excess", worst, 3 * cfg.tol);
  }
  {
    Rng rng = r.rng();
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Derivation d = random_derivation(rng, 2, 2);
      const DensityMatrix p = random_density(rng, 2);
      const DensityMatrix q(p.matrix() + 1e-9 * random_hermitian(rng, 2).matrix());
      if (solve_geodesic(d, p, q, cfg).distance < cfg.tol) worst = std::max(worst, hs_norm(p.matrix() - q.matrix()));
    }
    r.at_most("definiteness_hs_gap", worst, 1e-3);
  }
  {
    Rng rng = r.rng();
    const Derivation d = random_derivation(rng, 2, 2);
    const DensityMatrix p = random_density(rng, 2), q = random_density(rng, 2);
    SolverConfig c = cfg;
    c.steps = 8;
    const double e8 = solve_geodesic(d, p, q, c).energy;
    c.steps = 16;
    const double e16 = solve_geodesic(d, p, q, c).energy;
    c.steps = 32;
    const double e32 = solve_geodesic(d, p, q, c).energy;
    // Second-order convergence in N: successive differences shrink.
    r.at_most("refinement_difference_ratio", (e32 - e16) / std::max(e16 - e8, 1e-300), 0.5);
    r.at_most("refinement_spread_relative", std::abs(e32 - e8) / e32, 1e-2);
  }
  {
    Rng rng = r.rng();
    const Derivation d = random_derivation(rng, 2, 2);
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      const DensityMatrix p = random_density(rng, 2), q = random_density(rng, 2);
      const TransportResult res = solve_geodesic(d, p, q, cfg);
      const LinearPathResult lin = linear_path(d, p, q, cfg.steps, cfg.feas_tol);
      const double bound = lin.path ? std::sqrt(path_energy(d, *lin.path, cfg.feas_tol))
                                    : std::numeric_limits<double>::infinity();
      worst_excess = std::max(worst_excess, res.distance - bound);
    }
    // Infinite distances make the excess inf or nan, which fails.
    r.at_most("diameter_linear_bound_excess", worst_excess, 1e-9);
  }
  {
    Rng rng = r.rng();
    const Derivation d = block_derivation(rng);
    int wrong = 0;
    for (int i = 0; i < 3; ++i) {
      const DensityMatrix p = block_density(rng, 0.3);
      if (solve_geodesic(d, p, block_density(rng, 0.6), cfg).feasible) ++wrong;
      if (!solve_geodesic(d, p, block_density(rng, 0.3), cfg).feasible) ++wrong;
    }
    r.at_most("block_mass_obstruction_errors", wrong, 0.0);
  }
}

void bundle_suite(Recorder& r) {
  SolverConfig cfg;
  cfg.steps = 8;
  {
    Rng rng = r.rng();
    double worst_assembled = 0.0, worst_mono = 0.0;
    for (int i = 0; i < 3; ++i) {
      const std::size_t k = 2 + i;
      const VerticalGradient vg = random_vertical(rng, k, 2, 2);
      const std::vector<double> masses = random_masses(rng, k);
      const FiberedDensity p = random_fibered(rng, vg.base(), 2, masses);
      const FiberedDensity q = random_fibered(rng, vg.base(), 2, masses);
      const DisintegrationResult res = disintegrated_distance(vg, p, q, cfg);
      const FiberedPath path = assemble_global_path(vg, res, p);
      worst_assembled = std::max(worst_assembled, std::abs(path.energy - res.total_sq));
      if (i < 2) {
        const TransportResult mono = monolithic_distance(vg, p, q, cfg);
        worst_mono = std::max(worst_mono, std::abs(mono.energy - res.total_sq) / res.total_sq);
      }
    }
    r.at_most("assembled_energy_vs_fiber_sum", worst_assembled, 1e-9);
    r.at_most("monolithic_vs_fiber_sum_relative", worst_mono, 1e-3);
  }
  {
    Rng rng = r.rng();
    int disagreements = 0;
    for (int i = 0; i < 2; ++i) {
      const VerticalGradient vg = random_vertical(rng, 2, 2, 2);
      const FiberedDensity p = random_fibered(rng, vg.base(), 2, {1.0, 1.0});
      const FiberedDensity q = random_fibered(rng, vg.base(), 2, {1.5, 0.7});
      if (disintegrated_distance(vg, p, q, cfg).feasible) ++disagreements;
      if (monolithic_distance(vg, p, q, cfg).feasible) ++disagreements;
      // Entrywise perturbations of p that move fiber mass stay infinitely far.
      for (int e = 1; e <= 4; ++e) {
        const double eps = std::pow(10.0, -e);
        std::vector<HermitianMatrix> f = p.fibers();
        const double shift = eps * f[0].trace() * vg.base().weight(0) / vg.base().weight(1);
        f[0] = (1.0 - eps) * f[0];
        f[1] = f[1] + (shift / 2.0) * HermitianMatrix::identity(2);
        if (std::isfinite(disintegrated_distance(vg, p, FiberedDensity(vg.base(), f), cfg).total_sq)) ++disagreements;
      }
    }
    r.at_most("mass_gate_errors", disagreements, 0.0);
  }
  {
    Rng rng = r.rng();
    const VerticalGradient vg = random_vertical(rng, 3, 2, 2);
    const std::vector<double> masses = random_masses(rng, 3);
    const FiberedDensity p = random_fibered(rng, vg.base(), 2, masses);
    const FiberedDensity q = random_fibered(rng, vg.base(), 2, masses);
    const double a = disintegrated_distance(vg, p, q, cfg).total_sq;
    const double c = 2.5;
    std::vector<double> w;
    for (double x : vg.base().weights()) w.push_back(c * x);
    const VerticalGradient vg2(FiniteBase(w), vg.per_fiber());
    const auto rescale = [&](const FiberedDensity& x) {
      std::vector<HermitianMatrix> f;
      for (const auto& m : x.fibers()) f.push_back((1.0 / c) * m);
      return FiberedDensity(vg2.base(), f);
    };
    const double b = disintegrated_distance(vg2, rescale(p), rescale(q), cfg).total_sq;
    r.at_most("base_rescaling_relative", std::abs(a - b) / a, 1e-12);
  }
  {
    Rng rng = r.rng();
    const VerticalGradient vg = random_vertical(rng, 3, 2, 2);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const FiberedDensity p = random_fibered(rng, vg.base(), 2, random_masses(rng, 3));
      const FiberedDensity q = random_fibered(rng, vg.base(), 2, random_masses(rng, 3));
      std::vector<HermitianMatrix> mid;
      for (std::size_t j = 0; j < 3; ++j) mid.push_back(0.5 * (p.fiber(j) + q.fiber(j)));
      worst = std::max(worst, mean_entropy(vg.base(), FiberedDensity(vg.base(), mid)) -
                                  0.5 * (mean_entropy(vg.base(), p) + mean_entropy(vg.base(), q)));
    }
    r.at_most("mean_entropy_convexity_excess", std::max(worst, 0.0), 1e-12);
  }
  {
    Rng rng = r.rng();
    const VerticalGradient vg = random_vertical(rng, 2, 2, 2);
    const MeanCurvatureReport rep = mean_curvature_check(vg, 4, rng(), cfg);
    r.at_most("mean_curvature_shortfall", rep.essinf_fiber - rep.mcurv_estimate, kMeanCurvatureSlack);
  }
}

struct SuiteEntry {
  const char* name;
  void (*run)(Recorder&);
};

const SuiteEntry kSuites[] = {
    {"spectral", spectral_suite},   {"derivation", derivation_suite}, {"entropy", entropy_suite},
    {"transport", transport_suite}, {"bundle", bundle_suite},
};

}  // namespace

int CheckSummary::failures() const {
  return static_cast<int>(std::count_if(lines.begin(), lines.end(), [](const CheckLine& l) { return !l.pass; }));
}

const std::vector<std::string>& check_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : kSuites) v.emplace_back(s.name);
    return v;
  }();
  return names;
}

std::string format_check_line(const CheckLine& line) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %-10s %-34s %.17g %s %.6g", line.pass ? "PASS" : "FAIL", line.suite.c_str(),
                line.name.c_str(), line.value, line.relation.c_str(), line.bound);
  return buf;
}

CheckSummary run_checks(const std::string& suite, std::uint64_t seed, std::ostream& out) {
  bool known = suite == "all";
  for (const auto& s : kSuites) known = known || suite == s.name;
  if (!known) throw UsageError("unknown check suite \"" + suite + "\"");
  CheckSummary summary;
  std::uint64_t index = 0;
  for (const auto& s : kSuites) {
    ++index;
    if (suite != "all" && suite != s.name) continue;
    Recorder rec(s.name, seed, index << 16, out, summary);
    s.run(rec);
  }
  const int failed = summary.failures();
  out << (failed == 0 ? "PASS" : "FAIL") << " " << summary.lines.size() - failed << " of " << summary.lines.size()
      << " invariants within tolerance\n";
  return summary;
}

}  // namespace ncot
