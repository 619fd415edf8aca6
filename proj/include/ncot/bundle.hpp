#pragma once

// Trivial matrix-algebra bundles over a finite weighted base: product traces,
// fibered densities, vertical gradients, fiberwise (disintegrated) transport
// and mean entropic curvature.

#include <cstdint>
#include <string>
#include <vector>

#include "ncot/derivation.hpp"
#include "ncot/entropy.hpp"
#include "ncot/transport.hpp"

namespace ncot {

class FiniteBase {
 public:
  FiniteBase() = default;
  // Throws DomainError unless every weight is finite and > 0.
  explicit FiniteBase(std::vector<double> weights, std::vector<std::string> labels = {});

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }
  double weight(std::size_t j) const { return weights_[j]; }

 private:
  std::vector<double> weights_;
  std::vector<std::string> labels_;
};

// Positive fibers P(x_j) of a common dimension with sum_j nu_j tr P(x_j) = 1.
class FiberedDensity {
 public:
  static constexpr double kNormalizationTol = 1e-10;

  FiberedDensity() = default;
  FiberedDensity(FiniteBase base, std::vector<HermitianMatrix> fibers);

  const FiniteBase& base() const { return base_; }
  const std::vector<HermitianMatrix>& fibers() const { return fibers_; }
  const HermitianMatrix& fiber(std::size_t j) const { return fibers_[j]; }
  std::size_t n() const { return fibers_.empty() ? 0 : fibers_.front().n(); }
  std::size_t size() const { return fibers_.size(); }

 private:
  FiniteBase base_;
  std::vector<HermitianMatrix> fibers_;
};

class VerticalGradient {
 public:
  VerticalGradient() = default;
  // All fiber derivations must share n and m.
  VerticalGradient(FiniteBase base, std::vector<Derivation> per_fiber);

  const FiniteBase& base() const { return base_; }
  const std::vector<Derivation>& per_fiber() const { return per_fiber_; }
  const Derivation& fiber(std::size_t j) const { return per_fiber_[j]; }
  std::size_t n() const { return per_fiber_.front().n(); }
  std::size_t m() const { return per_fiber_.front().m(); }
  std::size_t size() const { return per_fiber_.size(); }

 private:
  FiniteBase base_;
  std::vector<Derivation> per_fiber_;
};

// sum_j nu_j tr F(x_j)
double product_trace(const FiniteBase& base, const std::vector<CMatrix>& section);
std::vector<double> fiber_masses(const FiberedDensity& p);

inline constexpr double kMassGate = 1e-8;
inline constexpr double kZeroMass = 1e-12;

struct FiberRecord {
  double mass = 0.0;
  bool feasible = true;
  double w2 = 0.0;
  bool solved = false;     // false for zero-mass fibers and after an early mass-gate exit
  TransportResult result;  // solve on the normalized fibers when `solved`
};

struct DisintegrationResult {
  bool feasible = false;
  double total_sq = 0.0;  // +inf when infeasible
  bool mass_mismatch = false;
  int offending_fiber = -1;
  std::vector<FiberRecord> per_fiber;
};

DisintegrationResult disintegrated_distance(const VerticalGradient& vg, const FiberedDensity& p,
                                            const FiberedDensity& q, const SolverConfig& config = {},
                                            int jobs = 1);

// Global path t -> P_t(x_j) = tr P(x_j) rho_t^{(j)}; zero-mass fibers stay 0.
struct FiberedPath {
  int steps = 0;
  FiniteBase base;
  std::vector<std::vector<HermitianMatrix>> densities;   // [fiber][node]
  std::vector<std::vector<HermitianMatrix>> potentials;  // [fiber][step]
  double energy = 0.0;  // recomputed from the assembled path

  HermitianMatrix density_at(std::size_t fiber, double t) const;
};

// Energy of a fibered path: sum_j nu_j sum_steps (dt / 2) <G_j(Pbar) U, U>,
// with G_j the Onsager operator of fiber j evaluated at the unnormalized
// midpoint.
double fibered_path_energy(const VerticalGradient& vg, const FiberedPath& path);

// Throws UsageError when `result` is infeasible.
FiberedPath assemble_global_path(const VerticalGradient& vg, const DisintegrationResult& result,
                                 const FiberedDensity& p);

// Block-diagonal embedding into M_{nK}: generators diag(T_k(x_1), ..., T_k(x_K))
// and density diag(nu_1 P(x_1), ..., nu_K P(x_K)), which turns nu (x) tr into
// the plain trace.
Derivation monolithic_derivation(const VerticalGradient& vg);
DensityMatrix monolithic_density(const FiberedDensity& p);
TransportResult monolithic_distance(const VerticalGradient& vg, const FiberedDensity& p,
                                    const FiberedDensity& q, const SolverConfig& config = {});

// sum_j nu_j tr(P(x_j) log P(x_j))
double mean_entropy(const FiniteBase& base, const FiberedDensity& p);

struct MeanCurvatureReport {
  double mcurv_estimate = 0.0;
  std::vector<double> fiber_estimates;
  double essinf_fiber = 0.0;
  bool bound_satisfied = false;
  int pairs_evaluated = 0;
  int pairs_skipped = 0;
  int worst_pair_index = -1;
  std::uint64_t seed = 0;
};

inline constexpr double kMeanCurvatureSlack = 1e-6;

// Sample i draws, from make_rng(seed, i), fiber masses f_j ~ U(0.5, 1.5)
// rescaled so that sum_j nu_j f_j = 1, then P(x_j) = f_j rho_j and
// Q(x_j) = f_j sigma_j with rho_j, sigma_j random densities.
std::vector<std::pair<FiberedDensity, FiberedDensity>> sample_bundle_pairs(const VerticalGradient& vg,
                                                                           int sample_count,
                                                                           std::uint64_t seed);

// Global curvature gap of one bundle pair along the assembled disintegrated
// geodesic, plus the per-fiber gaps along the same fiber geodesics.
struct BundlePairEvaluation {
  PairEvaluation global;
  std::vector<PairEvaluation> fibers;
};
BundlePairEvaluation evaluate_bundle_pair(const VerticalGradient& vg, const FiberedDensity& p,
                                          const FiberedDensity& q, const SolverConfig& config);

// The mean-curvature estimate and the per-fiber estimates are computed from
// the same sampled pairs and the same fiber geodesics.
MeanCurvatureReport mean_curvature_check(const VerticalGradient& vg, int sample_count, std::uint64_t seed,
                                         const SolverConfig& config = {}, int jobs = 1);

}  // namespace ncot
