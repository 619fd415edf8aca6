#include <cmath>

#include "doctest.h"
#include "ncot/bundle.hpp"
#include "ncot/errors.hpp"
#include "ncot/random.hpp"
#include "support.hpp"

using namespace ncot;
using test::diff_norm;

namespace {

VerticalGradient random_vertical(Rng& rng, const std::vector<double>& weights, std::size_t n, std::size_t m) {
  std::vector<Derivation> fibers;
  for (std::size_t j = 0; j < weights.size(); ++j) fibers.push_back(random_derivation(rng, n, m));
  return VerticalGradient(FiniteBase(weights), std::move(fibers));
}

// Fibers mass_j * random density, masses rescaled to unit product trace.
FiberedDensity random_fibered(Rng& rng, const FiniteBase& base, std::size_t n, std::vector<double> masses) {
  double z = 0.0;
  for (std::size_t j = 0; j < masses.size(); ++j) z += base.weight(j) * masses[j];
  std::vector<HermitianMatrix> f;
  for (std::size_t j = 0; j < masses.size(); ++j) {
    if (masses[j] == 0.0) {
      f.push_back(HermitianMatrix::zero(n));
      continue;
    }
    f.push_back((masses[j] / z) * random_density(rng, n).base());
  }
  return FiberedDensity(base, std::move(f));
}

}  // namespace

TEST_CASE("finite base and fibered density validation") {
  CHECK_THROWS_AS(FiniteBase({1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(FiniteBase(std::vector<double>{}), DomainError);
  const FiniteBase base({1.0, 2.0});
  CHECK(base.labels().size() == 2);
  CHECK_THROWS_AS(FiberedDensity(base, {HermitianMatrix::identity(2)}), DimensionError);
  CHECK_THROWS_AS(FiberedDensity(base, {HermitianMatrix::identity(2), HermitianMatrix::identity(2)}), DomainError);
  Rng rng = make_rng(70);
  CHECK_THROWS_AS(VerticalGradient(base, {random_derivation(rng, 2, 1), random_derivation(rng, 2, 2)}),
                  DimensionError);
}

TEST_CASE("product trace examples") {
  const FiniteBase base({0.5, 1.5, 2.0});
  const double total = 4.0;
  const std::vector<CMatrix> uniform(3, (1.0 / (3.0 * total)) * CMatrix::identity(3));
  CHECK(product_trace(base, uniform) == doctest::Approx(1.0).epsilon(1e-15));

  Rng rng = make_rng(71);
  const HermitianMatrix h = random_hermitian(rng, 3);
  CHECK(product_trace(FiniteBase({1.0}), {h.matrix()}) == doctest::Approx(h.trace()).epsilon(1e-15));
  CHECK(product_trace(FiniteBase({1.0, 2.0}), {CMatrix::identity(2), CMatrix::identity(2)}) == 6.0);
  CHECK_THROWS_AS(product_trace(FiniteBase({1.0, 2.0}), {CMatrix::identity(2), CMatrix::identity(3)}),
                  DimensionError);
}

TEST_CASE("fiber masses") {
  const FiniteBase base({1.0, 3.0});
  const FiberedDensity uniform(base, {0.125 * HermitianMatrix::identity(2), 0.125 * HermitianMatrix::identity(2)});
  const auto m = fiber_masses(uniform);
  CHECK(m[0] == m[1]);
  const FiberedDensity single(base, {HermitianMatrix::zero(2), (1.0 / 3.0) * HermitianMatrix(test::diag({1, 0}))});
  CHECK(fiber_masses(single)[0] == 0.0);
  CHECK(fiber_masses(single)[1] > 0.0);
  Rng rng = make_rng(72);
  const FiberedDensity r = random_fibered(rng, base, 3, {0.2, 0.9});
  const auto mr = fiber_masses(r);
  CHECK(base.weight(0) * mr[0] + base.weight(1) * mr[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("disintegrated distance examples") {
  Rng rng = make_rng(73);
  SolverConfig cfg;
  cfg.steps = 8;
  const VerticalGradient vg = random_vertical(rng, {0.5, 1.0, 0.25}, 2, 2);
  const FiberedDensity p = random_fibered(rng, vg.base(), 2, {1.0, 0.4, 2.0});

  SUBCASE("P == Q") {
    const DisintegrationResult r = disintegrated_distance(vg, p, p, cfg);
    CHECK(r.feasible);
    CHECK(r.total_sq == 0.0);
    for (const auto& f : r.per_fiber) CHECK(f.w2 == 0.0);
  }
  SUBCASE("single-point base reduces to the algebra solver") {
    const VerticalGradient one = random_vertical(rng, {1.0}, 3, 2);
    const DensityMatrix a = random_density(rng, 3), b = random_density(rng, 3);
    const DisintegrationResult r = disintegrated_distance(one, FiberedDensity(one.base(), {a.base()}),
                                                          FiberedDensity(one.base(), {b.base()}), cfg);
    const TransportResult direct = solve_geodesic(one.fiber(0), a, b, cfg);
    CHECK(r.total_sq == doctest::Approx(direct.energy).epsilon(1e-14));
  }
  SUBCASE("mass mismatch is infinite") {
    const FiberedDensity q = random_fibered(rng, vg.base(), 2, {1.0, 0.5, 2.0});
    const DisintegrationResult r = disintegrated_distance(vg, p, q, cfg);
    CHECK_FALSE(r.feasible);
    CHECK(r.mass_mismatch);
    CHECK(std::isinf(r.total_sq));
    CHECK(r.offending_fiber >= 0);
    CHECK_THROWS_AS(assemble_global_path(vg, r, p), UsageError);
  }
  SUBCASE("fiber-level kernel obstruction propagates") {
    std::vector<Derivation> fibers = vg.per_fiber();
    fibers[1] = Derivation(2, {HermitianMatrix::zero(2), HermitianMatrix::zero(2)});
    const VerticalGradient broken(vg.base(), fibers);
    std::vector<HermitianMatrix> qf = p.fibers();
    qf[1] = p.fiber(1).trace() * random_density(rng, 2).base();
    const DisintegrationResult r = disintegrated_distance(broken, p, FiberedDensity(vg.base(), qf), cfg);
    CHECK_FALSE(r.feasible);
    CHECK_FALSE(r.mass_mismatch);
    CHECK(r.offending_fiber == 1);
  }
  SUBCASE("job count does not change the result") {
    const FiberedDensity q = random_fibered(rng, vg.base(), 2, {1.0, 0.4, 2.0});
    CHECK(disintegrated_distance(vg, p, q, cfg, 1).total_sq == disintegrated_distance(vg, p, q, cfg, 3).total_sq);
  }
}

TEST_CASE("disintegration additivity against the monolithic solve") {
  Rng rng = make_rng(74);
  SolverConfig cfg;
  cfg.steps = 8;
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<double> weights, masses;
    const std::size_t k = 2 + trial % 2;
    std::uniform_real_distribution<double> unif(0.3, 2.0);
    for (std::size_t j = 0; j < k; ++j) {
      weights.push_back(unif(rng));
      masses.push_back(unif(rng));
    }
    const VerticalGradient vg = random_vertical(rng, weights, 2, 2);
    const FiberedDensity p = random_fibered(rng, vg.base(), 2, masses);
    const FiberedDensity q = random_fibered(rng, vg.base(), 2, masses);
    const DisintegrationResult r = disintegrated_distance(vg, p, q, cfg);
    REQUIRE(r.feasible);
    const FiberedPath path = assemble_global_path(vg, r, p);
    CHECK(std::abs(path.energy - r.total_sq) <= 1e-9);
    const TransportResult mono = monolithic_distance(vg, p, q, cfg);
    REQUIRE(mono.feasible);
    CHECK(std::abs(mono.energy - r.total_sq) <= 1e-3 * r.total_sq);
  }
}

TEST_CASE("mass-preservation gate agrees with the monolithic solver") {
  Rng rng = make_rng(75);
  const VerticalGradient vg = random_vertical(rng, {1.0, 2.0}, 2, 2);
  const FiberedDensity p = random_fibered(rng, vg.base(), 2, {1.0, 1.0});
  const FiberedDensity q = random_fibered(rng, vg.base(), 2, {1.5, 0.8});
  CHECK_FALSE(disintegrated_distance(vg, p, q).feasible);
  CHECK_FALSE(monolithic_distance(vg, p, q).feasible);

  // Fibered densities converging entrywise to p with other fiber masses stay at infinite distance.
  for (int i = 1; i <= 4; ++i) {
    const double eps = std::pow(10.0, -i);
    std::vector<HermitianMatrix> f = p.fibers();
    const double shift = eps * f[0].trace();
    f[0] = (1.0 - eps) * f[0];
    f[1] = f[1] + (shift / (2.0 * 2.0)) * HermitianMatrix::identity(2);
    const FiberedDensity pi(vg.base(), f);
    CHECK(std::isinf(disintegrated_distance(vg, p, pi).total_sq));
  }
}

TEST_CASE("rescaling the base weights with compensating fibers leaves the distance unchanged") {
  Rng rng = make_rng(76);
  SolverConfig cfg;
  cfg.steps = 8;
  const VerticalGradient vg = random_vertical(rng, {1.0, 0.5}, 2, 2);
  const FiberedDensity p = random_fibered(rng, vg.base(), 2, {1.0, 2.0});
  const FiberedDensity q = random_fibered(rng, vg.base(), 2, {1.0, 2.0});
  const double c = 3.0;
  const FiniteBase scaled({c * 1.0, c * 0.5});
  const VerticalGradient vg2(scaled, vg.per_fiber());
  auto rescale = [&](const FiberedDensity& x) {
    std::vector<HermitianMatrix> f;
    for (const auto& m : x.fibers()) f.push_back((1.0 / c) * m);
    return FiberedDensity(scaled, f);
  };
  const double a = disintegrated_distance(vg, p, q, cfg).total_sq;
  const double b = disintegrated_distance(vg2, rescale(p), rescale(q), cfg).total_sq;
  CHECK(b == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("assembled global path") {
  Rng rng = make_rng(77);
  SolverConfig cfg;
  cfg.steps = 8;
  SUBCASE("identical fibers give identical fiber paths") {
    const Derivation d = random_derivation(rng, 2, 2);
    const VerticalGradient vg(FiniteBase({0.5, 0.5}), {d, d});
    const DensityMatrix a = random_density(rng, 2), b = random_density(rng, 2);
    const FiberedDensity p(vg.base(), {a.base(), a.base()});
    const FiberedDensity q(vg.base(), {b.base(), b.base()});
    const DisintegrationResult r = disintegrated_distance(vg, p, q, cfg);
    const FiberedPath path = assemble_global_path(vg, r, p);
    for (int s = 0; s <= path.steps; ++s)
      CHECK(diff_norm(path.densities[0][s].matrix(), path.densities[1][s].matrix()) == 0.0);
    CHECK(r.total_sq == doctest::Approx(solve_geodesic(d, a, b, cfg).energy).epsilon(1e-14));
  }
  SUBCASE("single fiber: assembly is the identity") {
    const VerticalGradient vg = random_vertical(rng, {1.0}, 2, 2);
    const DensityMatrix a = random_density(rng, 2), b = random_density(rng, 2);
    const FiberedDensity p(vg.base(), {a.base()}), q(vg.base(), {b.base()});
    const DisintegrationResult r = disintegrated_distance(vg, p, q, cfg);
    REQUIRE(r.feasible);
    const FiberedPath path = assemble_global_path(vg, r, p);
    for (int s = 0; s <= path.steps; ++s)
      CHECK(diff_norm(path.densities[0][s].matrix(), r.per_fiber[0].result.path.densities[s].matrix()) == 0.0);
  }
  SUBCASE("zero-mass fiber stays at zero") {
    const VerticalGradient vg = random_vertical(rng, {1.0, 1.0}, 2, 2);
    const FiberedDensity p = random_fibered(rng, vg.base(), 2, {1.0, 0.0});
    const FiberedDensity q = random_fibered(rng, vg.base(), 2, {1.0, 0.0});
    const DisintegrationResult r = disintegrated_distance(vg, p, q, cfg);
    REQUIRE(r.feasible);
    CHECK(r.per_fiber[1].w2 == 0.0);
    const FiberedPath path = assemble_global_path(vg, r, p);
    for (const auto& node : path.densities[1]) CHECK(hs_norm(node.matrix()) == 0.0);
    CHECK(std::abs(path.energy - r.total_sq) <= 1e-9);
  }
}

TEST_CASE("mean entropy examples") {
  Rng rng = make_rng(78);
  const DensityMatrix a = random_density(rng, 3);
  CHECK(mean_entropy(FiniteBase({1.0}), FiberedDensity(FiniteBase({1.0}), {a.base()})) ==
        doctest::Approx(entropy(a)).epsilon(1e-14));

  const FiniteBase base({0.5, 1.0, 0.25});
  const double f[] = {0.4, 0.6, 0.8};  // 0.5*0.4 + 0.6 + 0.25*0.8 = 1
  std::vector<HermitianMatrix> fibers;
  double expected = 0.0;
  for (int j = 0; j < 3; ++j) {
    fibers.push_back((f[j] / 3.0) * HermitianMatrix::identity(3));
    expected += base.weight(j) * (f[j] * std::log(f[j]) - f[j] * std::log(3.0));
  }
  CHECK(mean_entropy(base, FiberedDensity(base, fibers)) == doctest::Approx(expected).epsilon(1e-13));

  for (int trial = 0; trial < 10; ++trial) {
    const FiberedDensity p = random_fibered(rng, base, 2, {1.0, 2.0, 0.5});
    const FiberedDensity q = random_fibered(rng, base, 2, {0.3, 1.0, 1.5});
    std::vector<HermitianMatrix> mid;
    for (std::size_t j = 0; j < 3; ++j) mid.push_back(0.5 * (p.fiber(j) + q.fiber(j)));
    CHECK(mean_entropy(base, FiberedDensity(base, mid)) <=
          0.5 * (mean_entropy(base, p) + mean_entropy(base, q)) + 1e-12);
  }
}

TEST_CASE("mean curvature check") {
  Rng rng = make_rng(79);
  SolverConfig cfg;
  cfg.steps = 8;
  SUBCASE("single fiber: mean estimate equals the fiber estimate") {
    const VerticalGradient vg = random_vertical(rng, {1.0}, 2, 2);
    const MeanCurvatureReport rep = mean_curvature_check(vg, 3, 5, cfg);
    REQUIRE(rep.fiber_estimates.size() == 1);
    CHECK(rep.mcurv_estimate == doctest::Approx(rep.fiber_estimates[0]).epsilon(1e-12));
    CHECK(rep.bound_satisfied);
  }
  SUBCASE("identical fiber derivations and the bound") {
    const Derivation d = random_derivation(rng, 2, 2);
    const VerticalGradient vg(FiniteBase({0.7, 1.3}), {d, d});
    const MeanCurvatureReport rep = mean_curvature_check(vg, 4, 6, cfg);
    CHECK(rep.bound_satisfied);
    CHECK(rep.mcurv_estimate >= rep.essinf_fiber - kMeanCurvatureSlack);
    CHECK(rep.pairs_evaluated == 4);
  }
  SUBCASE("identical fibers and densities: the global gap is the single-fiber gap") {
    const Derivation d = random_derivation(rng, 2, 2);
    const VerticalGradient vg(FiniteBase({0.25, 0.75}), {d, d});
    const DensityMatrix a = random_density(rng, 2), b = random_density(rng, 2);
    const BundlePairEvaluation e = evaluate_bundle_pair(vg, FiberedDensity(vg.base(), {a.base(), a.base()}),
                                                        FiberedDensity(vg.base(), {b.base(), b.base()}), cfg);
    const PairEvaluation single = evaluate_pair(d, a, b, cfg);
    REQUIRE(e.global.valid);
    CHECK(e.global.gap == doctest::Approx(e.fibers[0].gap).epsilon(1e-9));
    CHECK(e.global.gap == doctest::Approx(e.fibers[1].gap).epsilon(1e-9));
    // The fibers are renormalized by their trace, so the re-run matches to solver accuracy.
    CHECK(e.fibers[0].gap == doctest::Approx(single.gap).epsilon(1e-4));
  }
  SUBCASE("deterministic for a fixed seed, independent of jobs") {
    const VerticalGradient vg = random_vertical(rng, {1.0, 2.0}, 2, 1);
    const MeanCurvatureReport a = mean_curvature_check(vg, 3, 9, cfg, 1);
    const MeanCurvatureReport b = mean_curvature_check(vg, 3, 9, cfg, 2);
    CHECK(a.mcurv_estimate == b.mcurv_estimate);
    CHECK(a.fiber_estimates == b.fiber_estimates);
  }
}
