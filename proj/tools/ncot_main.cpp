// ncot: command-line front end for the transport, entropy and bundle routines.
//
// Exit codes: 0 success, 1 input or configuration error, 2 infeasible
// (infinite distance), 3 solver did not converge (best iterate still emitted),
// 4 an invariant check failed.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ncot/bundle.hpp"
#include "ncot/checks.hpp"
#include "ncot/entropy.hpp"
#include "ncot/errors.hpp"
#include "ncot/io.hpp"
#include "ncot/transport.hpp"

namespace {

using ncot::io::json;

enum Exit : int { kOk = 0, kInputError = 1, kInfeasible = 2, kNotConverged = 3, kCheckFailed = 4 };

struct Flags {
  std::optional<int> steps;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
  std::optional<int> samples;
  std::string problem;
  std::string suite = "all";
};

ncot::SolverConfig solver_config(const ncot::io::Problem& prob, const Flags& f) {
  ncot::SolverConfig c = prob.solver;
  if (f.steps) c.steps = *f.steps;
  if (f.tol) c.tol = *f.tol;
  if (f.max_iters) c.max_iters = *f.max_iters;
  if (f.seed) c.seed = *f.seed;
  ncot::validate(c);
  return c;
}

void emit(const json& record) { std::cout << ncot::io::dump(record) << '\n'; }

void write_out(const Flags& f, const std::string& text) {
  if (f.out.empty()) return;
  std::ofstream file(f.out);
  if (!file) throw ncot::UsageError("cannot write " + f.out);
  file << text;
  if (!text.empty() && text.back() != '\n') file << '\n';
}

const ncot::io::AlgebraProblem& algebra(const ncot::io::Problem& prob, const char* command) {
  if (!prob.algebra) throw ncot::UsageError(std::string(command) + " needs a problem of kind \"algebra\"");
  return *prob.algebra;
}

const ncot::io::BundleProblem& bundle(const ncot::io::Problem& prob, const char* command) {
  if (!prob.bundle) throw ncot::UsageError(std::string(command) + " needs a problem of kind \"bundle\"");
  return *prob.bundle;
}

template <class T>
const T& require(const std::optional<T>& x, const char* field) {
  if (!x) throw ncot::ParseError(std::string("$.") + field + ": missing field");
  return *x;
}

int transport_exit(const ncot::TransportResult& r) {
  if (!r.feasible) return kInfeasible;
  return r.converged ? kOk : kNotConverged;
}

int cmd_dist(const Flags& f, bool geodesic) {
  const ncot::io::Problem prob = ncot::io::load_problem(f.problem);
  const auto& a = algebra(prob, geodesic ? "geodesic" : "dist");
  const ncot::TransportResult r =
      ncot::solve_geodesic(a.derivation, require(a.p, "p"), require(a.q, "q"), solver_config(prob, f));
  emit(ncot::io::transport_record(r, false));
  write_out(f, ncot::io::dump(ncot::io::transport_record(r, geodesic)));
  return transport_exit(r);
}

int cmd_heat(const Flags& f) {
  const ncot::io::Problem prob = ncot::io::load_problem(f.problem);
  const auto& a = algebra(prob, "heat");
  const ncot::DensityMatrix& p = require(a.p, "p");
  std::vector<double> times = a.heat_times;
  if (times.empty())
    for (int k = 0; k <= 10; ++k) times.push_back(k / 10.0);
  json rows = json::array();
  std::string csv = "t,entropy,dissipation\n";
  for (double t : times) {
    const ncot::DensityMatrix pt = ncot::heat(a.derivation, p, t);
    json row;
    row["t"] = t;
    row["entropy"] = ncot::entropy(pt);
    std::string diss_text = "nan";
    try {
      const double diss = ncot::entropy_dissipation(a.derivation, pt);
      row["dissipation"] = diss;
      row["singular"] = false;
      diss_text = ncot::io::dump(json(diss));
    } catch (const ncot::SingularityError&) {
      row["dissipation"] = nullptr;
      row["singular"] = true;
    }
    csv += ncot::io::dump(json(t)) + "," + ncot::io::dump(row["entropy"]) + "," + diss_text + "\n";
    rows.push_back(std::move(row));
  }
  json rec;
  rec["record"] = "heat";
  rec["rows"] = std::move(rows);
  emit(rec);
  write_out(f, csv);
  return kOk;
}

int cmd_entropy(const Flags& f) {
  const ncot::io::Problem prob = ncot::io::load_problem(f.problem);
  json rec;
  rec["record"] = "entropy";
  if (prob.algebra) {
    const auto& a = *prob.algebra;
    if (!a.p && !a.q) throw ncot::ParseError("$.p: missing field");
    if (a.p) rec["p"] = ncot::entropy(*a.p);
    if (a.q) rec["q"] = ncot::entropy(*a.q);
  } else {
    const auto& b = bundle(prob, "entropy");
    if (!b.p && !b.q) throw ncot::ParseError("$.P: missing field");
    if (b.p) rec["P"] = ncot::mean_entropy(b.vg.base(), *b.p);
    if (b.q) rec["Q"] = ncot::mean_entropy(b.vg.base(), *b.q);
  }
  emit(rec);
  write_out(f, ncot::io::dump(rec));
  return kOk;
}

int cmd_curvature(const Flags& f) {
  const ncot::io::Problem prob = ncot::io::load_problem(f.problem);
  const ncot::SolverConfig cfg = solver_config(prob, f);
  const int samples = f.samples ? *f.samples : prob.samples.value_or(20);
  const std::uint64_t seed = f.seed.value_or(prob.solver.seed);
  json rec;
  if (prob.algebra) {
    rec = ncot::io::curvature_record(ncot::estimate_curvature(prob.algebra->derivation, samples, seed, cfg, f.jobs));
  } else {
    rec = ncot::io::mean_curvature_record(
        ncot::mean_curvature_check(bundle(prob, "curvature").vg, samples, seed, cfg, f.jobs));
  }
  emit(rec);
  write_out(f, ncot::io::dump(rec));
  return kOk;
}

int cmd_disintegrate(const Flags& f) {
  const ncot::io::Problem prob = ncot::io::load_problem(f.problem);
  const auto& b = bundle(prob, "disintegrate");
  const ncot::DisintegrationResult r =
      ncot::disintegrated_distance(b.vg, require(b.p, "P"), require(b.q, "Q"), solver_config(prob, f), f.jobs);
  emit(ncot::io::disintegration_record(r, false));
  write_out(f, ncot::io::dump(ncot::io::disintegration_record(r, true)));
  if (!r.feasible) return kInfeasible;
  for (const auto& rec : r.per_fiber)
    if (rec.mass > ncot::kZeroMass && !rec.result.converged) return kNotConverged;
  return kOk;
}

int cmd_check(const Flags& f) {
  const ncot::CheckSummary s = ncot::run_checks(f.suite, f.seed.value_or(0), std::cout);
  return s.failures() == 0 ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noncommutative Wasserstein transport, entropy and curvature on matrix algebras"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--steps", f.steps, "time steps of the discretized path");
  app.add_option("--tol", f.tol, "relative energy decrease that counts as converged");
  app.add_option("--max-iters", f.max_iters, "optimizer iteration cap");
  app.add_option("--seed", f.seed, "seed for sampling and restarts");
  app.add_option("--jobs", f.jobs, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", f.out, "results file");
  app.add_option("--samples", f.samples, "sampled pairs for curvature")->check(CLI::PositiveNumber);

  const auto with_problem = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("problem", f.problem, "problem file")->required();
    return sub;
  };
  CLI::App* dist = with_problem("dist", "distance between p and q");
  CLI::App* geo = with_problem("geodesic", "distance and geodesic path; --out receives the path");
  CLI::App* heat = with_problem("heat", "entropy and dissipation along the heat flow from p");
  CLI::App* ent = with_problem("entropy", "entropy of the given densities");
  CLI::App* curv = with_problem("curvature", "sampled entropic curvature estimate");
  CLI::App* dis = with_problem("disintegrate", "fiberwise distance on a bundle problem");
  CLI::App* check = app.add_subcommand("check", "run built-in invariant suites");
  check->add_option("suite", f.suite, "spectral, derivation, entropy, transport, bundle or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (dist->parsed()) return cmd_dist(f, false);
    if (geo->parsed()) return cmd_dist(f, true);
    if (heat->parsed()) return cmd_heat(f);
    if (ent->parsed()) return cmd_entropy(f);
    if (curv->parsed()) return cmd_curvature(f);
    if (dis->parsed()) return cmd_disintegrate(f);
    if (check->parsed()) return cmd_check(f);
  } catch (const ncot::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const ncot::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
