#pragma once

// Relative entropy with respect to the trace, its dissipation along the heat
// flow, and sampled estimates of entropic curvature lower bounds.

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ncot/derivation.hpp"
#include "ncot/spectral.hpp"
#include "ncot/transport.hpp"

namespace ncot {

// Eigenvalues below this are treated as exact zeros in x log x.
inline constexpr double kEntropyZero = 1e-14;

// tr(p log p) for a unit-trace density, in [-log n, 0].
double entropy(const DensityMatrix& p);
// tr(x log x) for any positive semidefinite x (no normalization).
double trace_xlogx(const HermitianMatrix& x);

// d/dt Ent(heat(p, t)) at t = 0, i.e. -sum_k <Dlog_p(grad_k p), grad_k p> <= 0.
// Requires min eigenvalue > 1e-10; throws SingularityError otherwise.
double entropy_dissipation(const Derivation& d, const DensityMatrix& p);

// Interior times k / kCurvatureGrid, k = 1 .. kCurvatureGrid - 1.
inline constexpr int kCurvatureGrid = 16;
inline constexpr double kDegenerateDistanceSq = 1e-14;

// min over the interior grid of
//   2 [(1 - t) ent_p + t ent_q - ent(t)] / [t (1 - t) w2sq].
// Throws DegeneratePairError when w2sq <= kDegenerateDistanceSq.
double curvature_gap(double ent_p, double ent_q, const std::function<double(double)>& ent_at,
                     double w2sq);
// Same along a transport path; densities between grid nodes are interpolated linearly.
double curvature_gap(const DensityMatrix& p, const DensityMatrix& q, const TransportPath& path,
                     double w2sq);

// Pairs closer than this in W2^2 are skipped by the estimators.
inline constexpr double kMinPairDistanceSq = 1e-8;

struct PairEvaluation {
  bool valid = false;
  bool feasible = false;
  double w2sq = 0.0;
  double gap = 0.0;  // meaningful when valid
};

PairEvaluation evaluate_pair(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q,
                             const SolverConfig& config);

struct CurvatureReport {
  double estimate = 0.0;  // +inf when no pair is valid
  int pairs_evaluated = 0;
  int pairs_skipped = 0;
  int worst_pair_index = -1;
  std::uint64_t seed = 0;
  std::optional<std::pair<DensityMatrix, DensityMatrix>> worst_pair;
};

// Min-reduction in pair-index order.
CurvatureReport reduce_evaluations(const std::vector<PairEvaluation>& evals,
                                   const std::vector<std::pair<DensityMatrix, DensityMatrix>>& pairs,
                                   std::uint64_t seed);

// Pair i is drawn from make_rng(seed, i) as two random_density samples.
std::vector<std::pair<DensityMatrix, DensityMatrix>> sample_pairs(std::size_t n, int sample_count,
                                                                  std::uint64_t seed);

CurvatureReport estimate_curvature(const Derivation& d, int sample_count, std::uint64_t seed,
                                   const SolverConfig& config = {}, int jobs = 1);
CurvatureReport estimate_curvature(const Derivation& d,
                                   const std::vector<std::pair<DensityMatrix, DensityMatrix>>& pairs,
                                   const SolverConfig& config = {}, int jobs = 1);

}  // namespace ncot
