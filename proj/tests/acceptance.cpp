// Acceptance criteria 1-10. One PASS/FAIL line per criterion with the worst
// measured value, its tolerance and the runtime; exits nonzero on any FAIL.
//
// Usage: acceptance [path-to-ncot-cli]
// Criterion 10 runs the CLI twice when a path is given, else calls the check
// runner in-process twice.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ncot/bundle.hpp"
#include "ncot/checks.hpp"
#include "ncot/entropy.hpp"
#include "ncot/random.hpp"
#include "ncot/transport.hpp"
#include "oracles.hpp"

using namespace ncot;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= time_limit_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::printf("%s %2d %-44s %s; %.2f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs,
              time_limit_s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

DensityMatrix qubit_diag(double a) { return DensityMatrix(HermitianMatrix::diagonal(std::array{a, 1.0 - a})); }

Derivation sigma_x() {
  CMatrix m(2);
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return Derivation(2, {HermitianMatrix(m)});
}

VerticalGradient random_vertical(Rng& rng, std::size_t k) {
  std::uniform_real_distribution<double> unif(0.3, 2.0);
  std::vector<double> weights;
  std::vector<Derivation> fibers;
  for (std::size_t j = 0; j < k; ++j) {
    weights.push_back(unif(rng));
    fibers.push_back(random_derivation(rng, 2, 2));
  }
  return VerticalGradient(FiniteBase(weights), std::move(fibers));
}

FiberedDensity random_fibered(Rng& rng, const FiniteBase& base, const std::vector<double>& masses) {
  double z = 0.0;
  for (std::size_t j = 0; j < masses.size(); ++j) z += base.weight(j) * masses[j];
  std::vector<HermitianMatrix> f;
  for (double m : masses) f.push_back((m / z) * random_density(rng, 2).base());
  return FiberedDensity(base, std::move(f));
}

// 1. mult_op(t)(dlog_solve(t, s)) = s and tr(t X) = tr(s).
Outcome pedersen_round_trip() {
  Rng rng = make_rng(1001);
  const std::size_t dims[] = {2, 3, 4, 6};
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  double worst_rel = 0.0, worst_tr = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = dims[i % 4];
    const HermitianMatrix t = scale(rng) * random_density(rng, n).base();
    const HermitianMatrix s = random_hermitian(rng, n);
    const HermitianMatrix x = dlog_solve(t, s);
    worst_rel = std::max(worst_rel, hs_norm(mult_op(t).apply(x.matrix()) - s.matrix()) / hs_norm(s.matrix()));
    worst_tr = std::max(worst_tr, std::abs((t.matrix() * x.matrix()).trace().real() - s.trace()));
  }
  return {worst_rel <= 1e-9 && worst_tr <= 1e-10,
          fmt("max rel residual %.3e (tol 1e-9), max trace gap %.3e (tol 1e-10)", worst_rel, worst_tr)};
}

// 2. opnorm(mult_op(x)) = max eigenvalue of x.
Outcome mult_op_norm() {
  Rng rng = make_rng(1002);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + i % 4;
    const HermitianMatrix x = scale(rng) * random_density(rng, n).base();
    worst = std::max(worst, std::abs(mult_op(x).opnorm() - eig(x).eigenvalues.back()));
  }
  return {worst <= 1e-8, fmt("max |opnorm - lambda_max| %.3e (tol %.0e)", worst, 1e-8)};
}

// 3. grad(log rho)_k = Dlog_rho(grad(rho)_k) and M_rho(grad(log rho)_k) = grad(rho)_k.
Outcome chain_rule_key_identity() {
  Rng rng = make_rng(1003);
  const TwoVariableKernel dlog = dlog_kernel();
  double worst_chain = 0.0, worst_key = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + i % 3;
    const Derivation d = random_derivation(rng, n, 1 + i % 3);
    const DensityMatrix p = random_density(rng, n);
    const HermitianMatrix lg = func_calc(p.spectrum(), [](double l) { return std::log(l); });
    const auto glog = d.grad(lg.matrix()), gp = d.grad(p.matrix());
    for (std::size_t k = 0; k < d.m(); ++k) {
      worst_chain = std::max(worst_chain, hs_norm(glog[k] - schur_apply(p.spectrum(), dlog, gp[k])));
      worst_key = std::max(worst_key, hs_norm(apply_mult_op(p.spectrum(), glog[k]) - gp[k]));
    }
  }
  return {worst_chain <= 1e-8 && worst_key <= 1e-8,
          fmt("chain rule residual %.3e, key identity residual %.3e (tol 1e-8)", worst_chain, worst_key)};
}

// 4. Centered difference of Ent(heat(p, t)) at t = 0.1 against the dissipation.
Outcome dissipation_identity() {
  Rng rng = make_rng(1004);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 2 + i % 3;
    const Derivation d = random_derivation(rng, n, 1 + i % 3);
    const DensityMatrix p = random_density(rng, n);
    const double t = 0.1, h = 1e-5;
    const double fd = (entropy(heat(d, p, t + h)) - entropy(heat(d, p, t - h))) / (2 * h);
    worst = std::max(worst, std::abs(fd - entropy_dissipation(d, heat(d, p, t))));
  }
  return {worst <= 1e-3, fmt("max |FD - dissipation| %.3e (tol %.0e)", worst, 1e-3)};
}

// 5. Ergodic derivations make heat positivity improving; block-diagonal ones do not.
Outcome ergodicity() {
  Rng rng = make_rng(1005);
  int ergodic = 0, drawn = 0;
  double min_eig = kInf;
  while (ergodic < 50) {
    ++drawn;
    const std::size_t n = 2 + drawn % 3;
    const Derivation d = random_derivation(rng, n, 2 + drawn % 2);
    if (!is_ergodic(d).ergodic) continue;
    ++ergodic;
    const DensityMatrix p = random_density_of_rank(rng, n, 1 + drawn % (n - 1));
    min_eig = std::min(min_eig, heat(d, p, 0.1).min_eigenvalue());
  }
  int stuck = 0, flagged = 0;
  double max_leak = 0.0;
  for (int i = 0; i < 10; ++i) {
    // Generators block-diagonal on C^2 (+) C^(1 + i % 2); p lives in the first block.
    const std::size_t b = 1 + i % 2, n = 2 + b;
    std::vector<HermitianMatrix> gens;
    for (int k = 0; k < 2; ++k) {
      const CMatrix blocks[] = {random_hermitian(rng, 2).matrix(), random_hermitian(rng, b).matrix()};
      gens.emplace_back(block_diagonal(blocks));
    }
    const Derivation d(n, gens);
    if (!is_ergodic(d).ergodic) ++flagged;
    const CMatrix blocks[] = {random_density(rng, 2).matrix(), CMatrix(b)};
    const DensityMatrix p{block_diagonal(blocks)};
    double leak = 0.0;
    for (int k = 1; k <= 20; ++k) leak = std::max(leak, heat(d, p, 0.1 * k).min_eigenvalue());
    max_leak = std::max(max_leak, leak);
    if (leak <= 1e-12) ++stuck;
  }
  const bool pass = min_eig > 0.0 && stuck == 10 && flagged == 10;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "ergodic min eig %.3e (> 0); non-ergodic %d/10 stay non-faithful (max min-eig %.1e <= 1e-12), "
                "%d/10 detected",
                min_eig, stuck, max_leak, flagged);
  return {pass, buf};
}

// 6. Symmetry and triangle inequality on random triples.
Outcome metric_axioms() {
  Rng rng = make_rng(1006);
  double worst_sym = 0.0, worst_tri = 0.0;
  int triples = 0;
  while (triples < 30) {
    const std::size_t n = 2 + triples % 2;
    const Derivation d = random_derivation(rng, n, 2);
    const DensityMatrix a = random_density(rng, n), b = random_density(rng, n), c = random_density(rng, n);
    const TransportResult ab = solve_geodesic(d, a, b), ba = solve_geodesic(d, b, a);
    const TransportResult bc = solve_geodesic(d, b, c), ac = solve_geodesic(d, a, c);
    if (!ab.feasible || !bc.feasible || !ac.feasible) continue;
    ++triples;
    worst_sym = std::max(worst_sym, std::abs(ab.distance - ba.distance) / ab.distance);
    worst_tri = std::max(worst_tri, (ac.distance - ab.distance - bc.distance) / ac.distance);
  }
  return {worst_sym <= 2e-4 && worst_tri <= 3e-4,
          fmt("max symmetry gap %.3e (tol 2e-4), max triangle excess %.3e (tol 3e-4)", worst_sym, worst_tri)};
}

// 7. Qubit with T = sigma_x between diagonal densities against dynamic programming.
Outcome commutative_oracle() {
  const Derivation d = sigma_x();
  Rng rng = make_rng(1007);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double a0 = unif(rng), a1 = unif(rng);
    const TransportResult r = solve_geodesic(d, qubit_diag(a0), qubit_diag(a1));
    const double w = std::sqrt(oracle::qubit_sigma_x_dp_energy_segment(a0, a1, 16, 2000));
    worst = std::max(worst, std::abs(r.distance - w) / w);
  }
  return {worst <= 1e-3, fmt("max rel gap %.3e (tol %.0e)", worst, 1e-3)};
}

// 8. Weighted fiber sum against the block-diagonal solve; mass mismatch on both routes.
Outcome disintegration() {
  Rng rng = make_rng(1008);
  SolverConfig cfg;
  double worst = 0.0;
  int gate_errors = 0;
  std::uniform_real_distribution<double> mass(0.3, 2.0);
  for (int i = 0; i < 10; ++i) {
    const std::size_t k = 1 + i % 4;
    const VerticalGradient vg = random_vertical(rng, k);
    std::vector<double> m;
    for (std::size_t j = 0; j < k; ++j) m.push_back(mass(rng));
    const FiberedDensity p = random_fibered(rng, vg.base(), m);
    const FiberedDensity q = random_fibered(rng, vg.base(), m);
    const DisintegrationResult dis = disintegrated_distance(vg, p, q, cfg);
    const TransportResult mono = monolithic_distance(vg, p, q, cfg);
    if (!dis.feasible || !mono.feasible) return {false, "feasible bundle pair reported infinite"};
    worst = std::max(worst, std::abs(mono.energy - dis.total_sq) / dis.total_sq);
    if (k > 1) {
      std::vector<double> other = m;
      other[0] *= 1.5;
      const FiberedDensity bad = random_fibered(rng, vg.base(), other);
      if (disintegrated_distance(vg, p, bad, cfg).feasible) ++gate_errors;
      if (monolithic_distance(vg, p, bad, cfg).feasible) ++gate_errors;
    }
  }
  return {worst <= 1e-3 && gate_errors == 0,
          fmt("max rel gap %.3e (tol 1e-3), mass-gate disagreements %.0f", worst, gate_errors)};
}

// 9. Mean curvature estimate against the worst fiber estimate on shared samples.
Outcome mean_curvature() {
  Rng rng = make_rng(1009);
  double worst = -kInf;
  int evaluated = 0;
  for (int i = 0; i < 5; ++i) {
    const VerticalGradient vg = random_vertical(rng, 2 + i % 3);
    const MeanCurvatureReport rep = mean_curvature_check(vg, 20, 100 + i, {}, 0);
    worst = std::max(worst, rep.essinf_fiber - rep.mcurv_estimate);
    evaluated += rep.pairs_evaluated;
  }
  return {worst <= 1e-6 && evaluated > 0,
          fmt("max (essinf fiber - mcurv) %.3e (tol 1e-6), %.0f pairs evaluated", worst, evaluated)};
}

std::string capture(const std::string& command, int& status) {
  std::string out;
  FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  status = pclose(pipe);
  return out;
}

// 10. `check all --seed 7` twice, byte for byte.
Outcome determinism(const std::string& cli) {
  std::string a, b;
  bool ok = true;
  if (!cli.empty()) {
    int sa = 0, sb = 0;
    a = capture("\"" + cli + "\" check all --seed 7", sa);
    b = capture("\"" + cli + "\" check all --seed 7", sb);
    ok = sa == 0 && sb == 0;
  } else {
    std::ostringstream x, y;
    ok = run_checks("all", 7, x).failures() == 0 && run_checks("all", 7, y).failures() == 0;
    a = x.str();
    b = y.str();
  }
  const bool same = !a.empty() && a == b;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu bytes, identical: %s, all checks passed: %s%s", a.size(), same ? "yes" : "no",
                ok ? "yes" : "no", cli.empty() ? " (in-process)" : "");
  return {same && ok, buf};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  run(1, "Pedersen round-trip", 5, pedersen_round_trip);
  run(2, "multiplication-operator norm", 5, mult_op_norm);
  run(3, "chain rule and key identity", 60, chain_rule_key_identity);
  run(4, "entropy dissipation", 60, dissipation_identity);
  run(5, "ergodicity vs positivity improving", 60, ergodicity);
  run(6, "metric axioms", 120, metric_axioms);
  run(7, "commutative reduction oracle", 120, commutative_oracle);
  run(8, "disintegration theorem", 300, disintegration);
  run(9, "mean curvature bound", 600, mean_curvature);
  run(10, "determinism of check all --seed 7", 120, [&] { return determinism(cli); });
  std::printf("%s: %d of 10 criteria passed\n", failures == 0 ? "PASS" : "FAIL", 10 - failures);
  return failures == 0 ? 0 : 1;
}
