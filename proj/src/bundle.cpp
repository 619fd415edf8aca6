#include "ncot/bundle.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ncot/errors.hpp"
#include "ncot/parallel.hpp"
#include "ncot/random.hpp"

namespace ncot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_base(const FiniteBase& a, const FiniteBase& b, const char* where) {
  if (a.size() != b.size()) throw DimensionError(std::string(where) + ": base sizes differ");
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a.weight(j) != b.weight(j)) throw DimensionError(std::string(where) + ": base weights differ");
}

}  // namespace

FiniteBase::FiniteBase(std::vector<double> weights, std::vector<std::string> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
  if (weights_.empty()) throw DomainError("FiniteBase: no points");
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    if (!(weights_[j] > 0.0) || !std::isfinite(weights_[j])) {
      std::ostringstream msg;
      msg << "FiniteBase: weight " << j << " = " << weights_[j] << " is not positive";
      throw DomainError(msg.str());
    }
  }
  if (labels_.empty())
    for (std::size_t j = 0; j < weights_.size(); ++j) labels_.push_back("x" + std::to_string(j + 1));
  if (labels_.size() != weights_.size()) throw DimensionError("FiniteBase: label count differs from weights");
}

FiberedDensity::FiberedDensity(FiniteBase base, std::vector<HermitianMatrix> fibers)
    : base_(std::move(base)), fibers_(std::move(fibers)) {
  if (fibers_.size() != base_.size()) throw DimensionError("FiberedDensity: fiber count differs from base");
  double total = 0.0;
  for (std::size_t j = 0; j < fibers_.size(); ++j) {
    if (fibers_[j].n() != fibers_.front().n()) throw DimensionError("FiberedDensity: fiber dimensions differ");
    const double lmin = eig(fibers_[j]).eigenvalues.front();
    if (lmin < DensityMatrix::kEigenvalueFloor) {
      std::ostringstream msg;
      msg << "FiberedDensity: fiber " << j << " has eigenvalue " << lmin;
      throw DomainError(msg.str());
    }
    total += base_.weight(j) * fibers_[j].trace();
  }
  if (std::abs(total - 1.0) > kNormalizationTol) {
    std::ostringstream msg;
    msg << "FiberedDensity: product trace " << total << " differs from 1";
    throw DomainError(msg.str());
  }
}

VerticalGradient::VerticalGradient(FiniteBase base, std::vector<Derivation> per_fiber)
    : base_(std::move(base)), per_fiber_(std::move(per_fiber)) {
  if (per_fiber_.size() != base_.size()) throw DimensionError("VerticalGradient: fiber count differs from base");
  for (const auto& d : per_fiber_) {
    if (d.n() != per_fiber_.front().n()) throw DimensionError("VerticalGradient: fiber dimensions differ");
    if (d.m() != per_fiber_.front().m()) throw DimensionError("VerticalGradient: generator counts differ");
  }
}

double product_trace(const FiniteBase& base, const std::vector<CMatrix>& section) {
  if (section.size() != base.size()) throw DimensionError("product_trace: section length differs from base");
  double s = 0.0;
  for (std::size_t j = 0; j < section.size(); ++j) {
    if (!section[j].square() || section[j].rows() != section.front().rows())
      throw DimensionError("product_trace: fiber dimensions differ");
    s += base.weight(j) * section[j].trace().real();
  }
  return s;
}

std::vector<double> fiber_masses(const FiberedDensity& p) {
  std::vector<double> m;
  m.reserve(p.size());
  for (const auto& f : p.fibers()) m.push_back(f.trace());
  return m;
}

DisintegrationResult disintegrated_distance(const VerticalGradient& vg, const FiberedDensity& p,
                                            const FiberedDensity& q, const SolverConfig& config,
                                            int jobs) {
  validate(config);
  require_same_base(vg.base(), p.base(), "disintegrated_distance");
  require_same_base(p.base(), q.base(), "disintegrated_distance");
  if (p.n() != vg.n() || q.n() != vg.n()) throw DimensionError("disintegrated_distance: dimension mismatch");

  const std::size_t k = vg.size();
  const std::vector<double> mp = fiber_masses(p), mq = fiber_masses(q);
  DisintegrationResult out;
  out.per_fiber.resize(k);
  for (std::size_t j = 0; j < k; ++j) out.per_fiber[j].mass = mp[j];
  for (std::size_t j = 0; j < k; ++j) {
    if (std::max(mp[j], mq[j]) > kZeroMass && std::abs(mp[j] - mq[j]) > kMassGate) {
      out.feasible = false;
      out.mass_mismatch = true;
      out.offending_fiber = static_cast<int>(j);
      out.total_sq = kInf;
      out.per_fiber[j].feasible = false;
      out.per_fiber[j].w2 = kInf;
      return out;
    }
  }

  parallel_for(k, jobs, [&](std::size_t j) {
    FiberRecord& rec = out.per_fiber[j];
    if (mp[j] <= kZeroMass) return;
    const DensityMatrix a((1.0 / mp[j]) * p.fiber(j).matrix());
    const DensityMatrix b((1.0 / mp[j]) * q.fiber(j).matrix());
    rec.result = solve_geodesic(vg.fiber(j), a, b, config);
    rec.solved = true;
    rec.feasible = rec.result.feasible;
    rec.w2 = rec.result.distance;
  });

  out.feasible = true;
  out.total_sq = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const FiberRecord& rec = out.per_fiber[j];
    if (!rec.feasible) {
      out.feasible = false;
      out.offending_fiber = static_cast<int>(j);
      out.total_sq = kInf;
      return out;
    }
    if (rec.mass > kZeroMass) out.total_sq += vg.base().weight(j) * rec.mass * rec.result.energy;
  }
  return out;
}

HermitianMatrix FiberedPath::density_at(std::size_t fiber, double t) const {
  const auto& nodes = densities.at(fiber);
  const double x = t * steps;
  const int i = std::min(static_cast<int>(std::floor(x)), steps);
  const double theta = x - i;
  if (i == steps || theta == 0.0) return nodes[i];
  return HermitianMatrix((1.0 - theta) * nodes[i].matrix() + theta * nodes[i + 1].matrix());
}

double fibered_path_energy(const VerticalGradient& vg, const FiberedPath& path) {
  const double dt = 1.0 / path.steps;
  double total = 0.0;
  for (std::size_t j = 0; j < path.densities.size(); ++j) {
    double fiber_total = 0.0;
    for (int s = 1; s <= path.steps; ++s) {
      const HermitianMatrix mid(0.5 * (path.densities[j][s - 1].matrix() + path.densities[j][s].matrix()));
      const CMatrix& u = path.potentials[j][s - 1].matrix();
      const CMatrix gu = onsager_apply(vg.fiber(j), eig(mid), u);
      fiber_total += 0.5 * dt * std::max(hs_inner(gu, u).real(), 0.0);
    }
    total += path.base.weight(j) * fiber_total;
  }
  return total;
}

FiberedPath assemble_global_path(const VerticalGradient& vg, const DisintegrationResult& result,
                                 const FiberedDensity& p) {
  if (!result.feasible) throw UsageError("assemble_global_path: disintegration result is infeasible");
  if (result.per_fiber.size() != p.size()) throw DimensionError("assemble_global_path: fiber count mismatch");
  FiberedPath path;
  path.base = p.base();
  path.steps = 0;
  for (const auto& rec : result.per_fiber)
    if (rec.mass > kZeroMass) path.steps = rec.result.path.steps;
  if (path.steps == 0) path.steps = 1;
  const std::size_t n = p.n();
  for (std::size_t j = 0; j < p.size(); ++j) {
    const FiberRecord& rec = result.per_fiber[j];
    std::vector<HermitianMatrix> nodes, pots;
    if (rec.mass <= kZeroMass) {
      nodes.assign(path.steps + 1, HermitianMatrix::zero(n));
      pots.assign(path.steps, HermitianMatrix::zero(n));
    } else {
      if (rec.result.path.steps != path.steps) throw DimensionError("assemble_global_path: step counts differ");
      for (const auto& rho : rec.result.path.densities) nodes.push_back(rec.mass * rho.base());
      // Potentials are unchanged: d/dt (m rho) = m G(rho) U = G(m rho) U.
      pots = rec.result.path.potentials;
    }
    path.densities.push_back(std::move(nodes));
    path.potentials.push_back(std::move(pots));
  }
  path.energy = fibered_path_energy(vg, path);
  return path;
}

Derivation monolithic_derivation(const VerticalGradient& vg) {
  std::vector<HermitianMatrix> gens;
  for (std::size_t k = 0; k < vg.m(); ++k) {
    std::vector<CMatrix> blocks;
    for (const auto& d : vg.per_fiber()) blocks.push_back(d.generators()[k].matrix());
    gens.emplace_back(block_diagonal(blocks));
  }
  return Derivation(vg.n() * vg.size(), std::move(gens));
}

DensityMatrix monolithic_density(const FiberedDensity& p) {
  std::vector<CMatrix> blocks;
  for (std::size_t j = 0; j < p.size(); ++j) blocks.push_back(p.base().weight(j) * p.fiber(j).matrix());
  return DensityMatrix(block_diagonal(blocks));
}

TransportResult monolithic_distance(const VerticalGradient& vg, const FiberedDensity& p,
                                    const FiberedDensity& q, const SolverConfig& config) {
  require_same_base(vg.base(), p.base(), "monolithic_distance");
  require_same_base(p.base(), q.base(), "monolithic_distance");
  return solve_geodesic(monolithic_derivation(vg), monolithic_density(p), monolithic_density(q), config);
}

double mean_entropy(const FiniteBase& base, const FiberedDensity& p) {
  require_same_base(base, p.base(), "mean_entropy");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += base.weight(j) * trace_xlogx(p.fiber(j));
  return s;
}

std::vector<std::pair<FiberedDensity, FiberedDensity>> sample_bundle_pairs(const VerticalGradient& vg,
                                                                           int sample_count,
                                                                           std::uint64_t seed) {
  std::vector<std::pair<FiberedDensity, FiberedDensity>> out;
  const std::size_t k = vg.size(), n = vg.n();
  for (int i = 0; i < sample_count; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    std::vector<double> f(k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      f[j] = unif(rng);
      z += vg.base().weight(j) * f[j];
    }
    std::vector<HermitianMatrix> pf, qf;
    for (std::size_t j = 0; j < k; ++j) {
      const double mass = f[j] / z;
      pf.push_back(mass * random_density(rng, n).base());
      qf.push_back(mass * random_density(rng, n).base());
    }
    out.emplace_back(FiberedDensity(vg.base(), std::move(pf)), FiberedDensity(vg.base(), std::move(qf)));
  }
  return out;
}

BundlePairEvaluation evaluate_bundle_pair(const VerticalGradient& vg, const FiberedDensity& p,
                                          const FiberedDensity& q, const SolverConfig& config) {
  const std::size_t k = vg.size();
  BundlePairEvaluation out;
  out.fibers.resize(k);
  const DisintegrationResult res = disintegrated_distance(vg, p, q, config, 1);
  out.global.feasible = res.feasible;
  if (!res.feasible) return out;
  for (std::size_t j = 0; j < k; ++j) {
    const FiberRecord& rec = res.per_fiber[j];
    PairEvaluation& fe = out.fibers[j];
    fe.feasible = rec.feasible;
    if (rec.mass <= kZeroMass) continue;
    fe.w2sq = rec.result.energy;
    if (fe.w2sq < kMinPairDistanceSq) continue;
    const TransportPath& tp = rec.result.path;
    fe.gap = curvature_gap(tp.densities.front(), tp.densities.back(), tp, fe.w2sq);
    fe.valid = true;
  }
  out.global.w2sq = res.total_sq;
  if (res.total_sq < kMinPairDistanceSq) return out;
  const FiberedPath path = assemble_global_path(vg, res, p);
  auto ent_at = [&](double t) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += vg.base().weight(j) * trace_xlogx(path.density_at(j, t));
    return s;
  };
  out.global.gap = curvature_gap(mean_entropy(vg.base(), p), mean_entropy(vg.base(), q), ent_at, res.total_sq);
  out.global.valid = true;
  return out;
}

MeanCurvatureReport mean_curvature_check(const VerticalGradient& vg, int sample_count, std::uint64_t seed,
                                         const SolverConfig& config, int jobs) {
  if (sample_count < 1) throw UsageError("mean_curvature_check: sample_count must be >= 1");
  validate(config);
  const auto samples = sample_bundle_pairs(vg, sample_count, seed);
  const std::size_t k = vg.size();
  std::vector<BundlePairEvaluation> evals(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    evals[i] = evaluate_bundle_pair(vg, samples[i].first, samples[i].second, config);
  });

  std::vector<PairEvaluation> global;
  std::vector<std::vector<PairEvaluation>> fiber(k);
  for (const auto& e : evals) {
    global.push_back(e.global);
    for (std::size_t j = 0; j < k; ++j) fiber[j].push_back(e.fibers[j]);
  }
  MeanCurvatureReport rep;
  rep.seed = seed;
  const CurvatureReport g = reduce_evaluations(global, {}, seed);
  rep.mcurv_estimate = g.estimate;
  rep.pairs_evaluated = g.pairs_evaluated;
  rep.pairs_skipped = g.pairs_skipped;
  rep.worst_pair_index = g.worst_pair_index;
  rep.essinf_fiber = kInf;
  for (std::size_t j = 0; j < k; ++j) {
    rep.fiber_estimates.push_back(reduce_evaluations(fiber[j], {}, seed).estimate);
    rep.essinf_fiber = std::min(rep.essinf_fiber, rep.fiber_estimates.back());
  }
  rep.bound_satisfied = rep.mcurv_estimate >= rep.essinf_fiber - kMeanCurvatureSlack;
  return rep;
}

}  // namespace ncot
