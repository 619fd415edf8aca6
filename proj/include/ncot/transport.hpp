#pragma once

// Tangent metric, Onsager operator G(p) = div M_p grad, and the
// time-discretized Benamou-Brenier problem
//   E = sum_j <d_j, G(rbar_j)^+ d_j> / (2 dt),  d_j = rho_j - rho_{j-1},
// solved over the interior densities rho_1..rho_{N-1}.

#include <cstdint>
#include <optional>
#include <vector>

#include "ncot/derivation.hpp"
#include "ncot/spectral.hpp"
#include "ncot/superoperator.hpp"

namespace ncot {

struct SolverConfig {
  int steps = 16;
  double tol = 1e-8;
  int max_iters = 5000;
  int patience = 20;
  double feas_tol = 1e-8;
  int restarts = 0;
  std::uint64_t seed = 0;
};

// Validates ranges; throws UsageError.
void validate(const SolverConfig& config);

struct TransportPath {
  int steps = 0;
  std::vector<DensityMatrix> densities;   // rho_0 .. rho_N
  std::vector<HermitianMatrix> potentials;  // U_1 .. U_N
  std::vector<double> step_energies;      // (dt / 2) <G(rbar_j) U_j, U_j>

  double dt() const { return 1.0 / steps; }
  double energy() const;
};

struct TransportResult {
  bool feasible = false;
  double distance = 0.0;  // +inf when infeasible
  double energy = 0.0;    // +inf when infeasible
  TransportPath path;     // empty when infeasible
  int iterations = 0;
  bool converged = false;
  double infeasible_component_norm = 0.0;
};

// Eigenvalues of the density are clamped below at `floor` before the
// log-mean weights are formed. floor = 0 gives the exact operator.
CMatrix onsager_apply(const Derivation& d, const SpectralDecomposition& p, const CMatrix& x,
                      double floor = 0.0);

double tangent_metric(const Derivation& d, const DensityMatrix& p, const HermitianMatrix& a,
                      const HermitianMatrix& b);
Superoperator onsager(const Derivation& d, const DensityMatrix& p);
// G(p) on range G(p), identity on ker G(p).
Superoperator s_operator(const Derivation& d, const DensityMatrix& p);

// Relative cutoff for the pseudo-inverse of G.
inline constexpr double kOnsagerCutoff = 1e-10;
// Eigenvalue floor inside G during optimization.
inline constexpr double kSolverEigenvalueFloor = 1e-12;

struct LinearPathResult {
  std::optional<TransportPath> path;
  // Offending component of q - p orthogonal to range G on the first failing step.
  CMatrix obstruction;
  double obstruction_norm = 0.0;
  int failing_step = -1;
};

LinearPathResult linear_path(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q,
                             int steps, double feas_tol = 1e-8);

TransportResult solve_geodesic(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q,
                               const SolverConfig& config = {});

// Discrete energy of the path through `nodes` (rho_0 .. rho_N) and its
// gradient with respect to the interior nodes, projected onto
// (ker grad)^perp. Interior nodes must differ from the straight line between
// the endpoints by elements of that subspace. `feasible` is false when a node
// leaves the positive cone or a step is not in the range of G.
struct DiscreteEnergy {
  bool feasible = false;
  double energy = 0.0;
  std::vector<HermitianMatrix> gradient;  // one per interior node
};
DiscreteEnergy discrete_energy(const Derivation& d, const std::vector<HermitianMatrix>& nodes,
                               double feas_tol = 1e-8);

// Sum of step energies after re-checking the continuity equation step by step.
// Throws InvalidPathError when a residual exceeds feas_tol * |d_j| + 1e-12.
double path_energy(const Derivation& d, const TransportPath& path, double feas_tol = 1e-8);

// t -> 1 - t, with potentials negated.
TransportPath reversed(const TransportPath& path);

// Density at time t in [0, 1], linear between grid nodes.
HermitianMatrix density_at(const TransportPath& path, double t);

}  // namespace ncot
