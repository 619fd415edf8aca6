#include "ncot/entropy.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ncot/errors.hpp"
#include "ncot/parallel.hpp"
#include "ncot/random.hpp"

namespace ncot {

namespace {

double xlogx_sum(const std::vector<double>& lam) {
  double s = 0.0;
  for (double l : lam)
    if (l >= kEntropyZero) s += l * std::log(l);
  return s;
}

}  // namespace

double entropy(const DensityMatrix& p) { return xlogx_sum(p.spectrum().eigenvalues); }

double trace_xlogx(const HermitianMatrix& x) { return xlogx_sum(eig(x).eigenvalues); }

double entropy_dissipation(const Derivation& d, const DensityMatrix& p) {
  if (p.n() != d.n()) throw DimensionError("entropy_dissipation: dimension mismatch");
  if (!(p.min_eigenvalue() > 1e-10)) {
    std::ostringstream msg;
    msg << "entropy_dissipation: min eigenvalue " << p.min_eigenvalue() << " is not above 1e-10";
    throw SingularityError(msg.str());
  }
  const TwoVariableKernel dlog = dlog_kernel();
  double s = 0.0;
  for (std::size_t k = 0; k < d.m(); ++k) {
    const CMatrix g = d.grad_component(k, p.matrix());
    s += hs_inner(schur_apply(p.spectrum(), dlog, g), g).real();
  }
  return -s;
}

double curvature_gap(double ent_p, double ent_q, const std::function<double(double)>& ent_at,
                     double w2sq) {
  if (!(w2sq > kDegenerateDistanceSq)) {
    std::ostringstream msg;
    msg << "curvature_gap: squared distance " << w2sq << " is degenerate";
    throw DegeneratePairError(msg.str());
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k < kCurvatureGrid; ++k) {
    const double t = static_cast<double>(k) / kCurvatureGrid;
    const double excess = (1.0 - t) * ent_p + t * ent_q - ent_at(t);
    best = std::min(best, 2.0 * excess / (t * (1.0 - t) * w2sq));
  }
  return best;
}

double curvature_gap(const DensityMatrix& p, const DensityMatrix& q, const TransportPath& path,
                     double w2sq) {
  if (path.densities.empty()) throw InvalidPathError("curvature_gap: empty path");
  if (path.densities.front().n() != p.n() || q.n() != p.n())
    throw DimensionError("curvature_gap: dimension mismatch");
  return curvature_gap(entropy(p), entropy(q),
                       [&](double t) { return trace_xlogx(density_at(path, t)); }, w2sq);
}

PairEvaluation evaluate_pair(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q,
                             const SolverConfig& config) {
  PairEvaluation e;
  const TransportResult r = solve_geodesic(d, p, q, config);
  e.feasible = r.feasible;
  if (!r.feasible) return e;
  e.w2sq = r.energy;
  if (e.w2sq < kMinPairDistanceSq) return e;
  e.gap = curvature_gap(p, q, r.path, e.w2sq);
  e.valid = true;
  return e;
}

CurvatureReport reduce_evaluations(const std::vector<PairEvaluation>& evals,
                                   const std::vector<std::pair<DensityMatrix, DensityMatrix>>& pairs,
                                   std::uint64_t seed) {
  CurvatureReport rep;
  rep.seed = seed;
  rep.estimate = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (!evals[i].valid) {
      ++rep.pairs_skipped;
      continue;
    }
    ++rep.pairs_evaluated;
    if (evals[i].gap < rep.estimate) {
      rep.estimate = evals[i].gap;
      rep.worst_pair_index = static_cast<int>(i);
    }
  }
  if (rep.worst_pair_index >= 0 && static_cast<std::size_t>(rep.worst_pair_index) < pairs.size())
    rep.worst_pair = pairs[rep.worst_pair_index];
  return rep;
}

std::vector<std::pair<DensityMatrix, DensityMatrix>> sample_pairs(std::size_t n, int sample_count,
                                                                  std::uint64_t seed) {
  std::vector<std::pair<DensityMatrix, DensityMatrix>> pairs;
  pairs.reserve(sample_count);
  for (int i = 0; i < sample_count; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    DensityMatrix p = random_density(rng, n);
    DensityMatrix q = random_density(rng, n);
    pairs.emplace_back(std::move(p), std::move(q));
  }
  return pairs;
}

CurvatureReport estimate_curvature(const Derivation& d,
                                   const std::vector<std::pair<DensityMatrix, DensityMatrix>>& pairs,
                                   const SolverConfig& config, int jobs) {
  validate(config);
  std::vector<PairEvaluation> evals(pairs.size());
  parallel_for(pairs.size(), jobs,
               [&](std::size_t i) { evals[i] = evaluate_pair(d, pairs[i].first, pairs[i].second, config); });
  return reduce_evaluations(evals, pairs, 0);
}

CurvatureReport estimate_curvature(const Derivation& d, int sample_count, std::uint64_t seed,
                                   const SolverConfig& config, int jobs) {
  if (sample_count < 1) throw UsageError("estimate_curvature: sample_count must be >= 1");
  CurvatureReport rep = estimate_curvature(d, sample_pairs(d.n(), sample_count, seed), config, jobs);
  rep.seed = seed;
  return rep;
}

}  // namespace ncot
