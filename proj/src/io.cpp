#include "ncot/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ncot/errors.hpp"

namespace ncot::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHermitianTol = 1e-12;

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ParseError(path + ": " + what); }

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) fail(path + "." + k, "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (j.is_null()) return kInf;
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double finite_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long long>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

json number_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::size_t literal_dim(const json& j, const std::string& path) {
  if (j.is_object() && j.contains("diag")) return array(j["diag"], path + ".diag").size();
  return array(j, path).size();
}

// Dimension of the first generator, 0 when it cannot be read off.
std::size_t generator_dim(const json& derivation) {
  if (!derivation.is_object()) return 0;
  const auto it = derivation.find("generators");
  if (it == derivation.end() || !it->is_array() || it->empty() || !(*it)[0].is_array()) return 0;
  return (*it)[0].size();
}

// A positive semidefinite fiber, matrix literal or {"diag": [..]}, unnormalized.
HermitianMatrix parse_psd(const json& j, const std::string& path) {
  HermitianMatrix h;
  if (j.is_object()) {
    reject_unknown(j, {"diag"}, path);
    const json& d = array(field(j, "diag", path), path + ".diag");
    if (d.empty()) fail(path + ".diag", "empty diagonal");
    std::vector<double> v;
    for (std::size_t i = 0; i < d.size(); ++i) {
      v.push_back(finite_number(d[i], at(path + ".diag", i)));
      if (v.back() < 0.0) fail(at(path + ".diag", i), "negative diagonal entry");
    }
    h = HermitianMatrix::diagonal(v);
  } else {
    h = parse_hermitian(j, path);
  }
  const double lmin = eig(h).eigenvalues.front();
  if (lmin < DensityMatrix::kEigenvalueFloor) {
    std::ostringstream msg;
    msg << "not positive semidefinite (min eigenvalue " << lmin << ")";
    fail(path, msg.str());
  }
  return h;
}

FiberedDensity parse_fibered(const json& j, const FiniteBase& base, std::size_t n, const std::string& path) {
  array(j, path);
  if (j.size() != base.size()) fail(path, "expected one fiber per base point");
  std::vector<HermitianMatrix> fibers;
  double total = 0.0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    fibers.push_back(parse_psd(j[i], at(path, i)));
    if (fibers.back().n() != n) fail(at(path, i), "fiber dimension differs from the generators");
    total += base.weight(i) * fibers.back().trace();
  }
  if (!(total > 0.0)) fail(path, "zero product trace");
  for (auto& f : fibers) f = (1.0 / total) * f;
  return FiberedDensity(base, std::move(fibers));
}

json path_json(const TransportPath& p) {
  json out;
  out["steps"] = p.steps;
  json dens = json::array(), pots = json::array(), en = json::array();
  for (const auto& d : p.densities) dens.push_back(to_json(d.matrix()));
  for (const auto& u : p.potentials) pots.push_back(to_json(u.matrix()));
  for (double e : p.step_energies) en.push_back(number_json(e));
  out["densities"] = std::move(dens);
  out["potentials"] = std::move(pots);
  out["step_energies"] = std::move(en);
  return out;
}

TransportPath parse_path(const json& j, const std::string& path) {
  TransportPath p;
  p.steps = static_cast<int>(integer(field(j, "steps", path), path + ".steps"));
  const json& dens = array(field(j, "densities", path), path + ".densities");
  const json& pots = array(field(j, "potentials", path), path + ".potentials");
  const json& en = array(field(j, "step_energies", path), path + ".step_energies");
  for (std::size_t i = 0; i < dens.size(); ++i)
    p.densities.emplace_back(parse_hermitian(dens[i], at(path + ".densities", i)).matrix());
  for (std::size_t i = 0; i < pots.size(); ++i) p.potentials.push_back(parse_hermitian(pots[i], at(path + ".potentials", i)));
  for (std::size_t i = 0; i < en.size(); ++i) p.step_energies.push_back(number(en[i], at(path + ".step_energies", i)));
  if (p.densities.size() != static_cast<std::size_t>(p.steps) + 1 || p.potentials.size() != static_cast<std::size_t>(p.steps) ||
      p.step_energies.size() != static_cast<std::size_t>(p.steps))
    fail(path, "array lengths do not match steps");
  return p;
}

void write_number(std::string& out, double x) {
  if (!std::isfinite(x)) {
    out += "null";
    return;
  }
  if (x == 0.0) x = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

void write(std::string& out, const json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(k).dump();
        out += indent < 0 ? ":" : ": ";
        write(out, v, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars, and arrays of such arrays (matrix rows), stay on one line.
      const auto scalars = [](const json& a) {
        for (const auto& v : a)
          if (v.is_structured()) return false;
        return true;
      };
      bool flat = true;
      for (const auto& v : j) flat = flat && (!v.is_structured() || (v.is_array() && scalars(v)));
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat || indent < 0 ? ", " : ",";
        if (!flat) newline(depth + 1);
        write(out, j[i], indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      return;
    }
    case json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace

CMatrix parse_matrix(const json& j, const std::string& path) {
  array(j, path);
  const std::size_t n = j.size();
  if (n == 0) fail(path, "empty matrix");
  CMatrix m(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::string rp = at(path, r);
    const json& row = array(j[r], rp);
    if (row.size() != n) fail(rp, "expected " + std::to_string(n) + " entries (matrices are square)");
    for (std::size_t c = 0; c < n; ++c) {
      const std::string ep = at(rp, c);
      const json& e = row[c];
      if (e.is_number()) {
        m(r, c) = e.get<double>();
      } else if (e.is_array() && e.size() == 2) {
        m(r, c) = cplx(finite_number(e[0], at(ep, 0)), finite_number(e[1], at(ep, 1)));
      } else {
        fail(ep, "expected [re, im]");
      }
    }
  }
  return m;
}

HermitianMatrix parse_hermitian(const json& j, const std::string& path) {
  const CMatrix m = parse_matrix(j, path);
  const double scale = std::max(1.0, max_abs(m));
  if (max_abs(m - m.adjoint()) > kHermitianTol * scale) fail(path, "matrix is not Hermitian");
  return HermitianMatrix(hermitian_part(m));
}

DensityMatrix parse_density(const json& j, const std::string& path) {
  const HermitianMatrix h = parse_psd(j, path);
  const double tr = h.trace();
  if (!(tr > 0.0)) fail(path, "zero trace");
  return DensityMatrix((1.0 / tr) * h);
}

Derivation parse_derivation(const json& j, std::size_t n, const std::string& path) {
  const std::string gp = path + ".generators";
  const json& g = array(field(j, "generators", path), gp);
  reject_unknown(j, {"generators"}, path);
  std::vector<HermitianMatrix> gens;
  for (std::size_t k = 0; k < g.size(); ++k) {
    gens.push_back(parse_hermitian(g[k], at(gp, k)));
    if (n == 0) n = gens.back().n();
    if (gens.back().n() != n) fail(at(gp, k), "generator dimension " + std::to_string(gens.back().n()) +
                                                  " differs from " + std::to_string(n));
  }
  if (n == 0) fail(gp, "dimension cannot be inferred from an empty generator list");
  return Derivation(n, std::move(gens));
}

SolverConfig parse_solver(const json& j, const SolverConfig& defaults, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  reject_unknown(j, {"steps", "tol", "max_iters", "patience", "feas_tol", "restarts", "seed"}, path);
  SolverConfig c = defaults;
  if (j.contains("steps")) c.steps = static_cast<int>(integer(j["steps"], path + ".steps"));
  if (j.contains("tol")) c.tol = finite_number(j["tol"], path + ".tol");
  if (j.contains("max_iters")) c.max_iters = static_cast<int>(integer(j["max_iters"], path + ".max_iters"));
  if (j.contains("patience")) c.patience = static_cast<int>(integer(j["patience"], path + ".patience"));
  if (j.contains("feas_tol")) c.feas_tol = finite_number(j["feas_tol"], path + ".feas_tol");
  if (j.contains("restarts")) c.restarts = static_cast<int>(integer(j["restarts"], path + ".restarts"));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail(path + ".seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  return c;
}

json to_json(const CMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const SolverConfig& c) {
  json out;
  out["steps"] = c.steps;
  out["tol"] = c.tol;
  out["max_iters"] = c.max_iters;
  out["patience"] = c.patience;
  out["feas_tol"] = c.feas_tol;
  out["restarts"] = c.restarts;
  out["seed"] = c.seed;
  return out;
}

Problem parse_problem(const json& j) {
  const std::string root = "$";
  if (!j.is_object()) fail(root, "expected an object");
  Problem prob;
  const json& kind = field(j, "kind", root);
  if (!kind.is_string()) fail("$.kind", "expected a string");
  prob.kind = kind.get<std::string>();
  if (j.contains("solver")) prob.solver = parse_solver(j["solver"], prob.solver, "$.solver");
  if (j.contains("curvature")) {
    const json& c = j["curvature"];
    reject_unknown(c, {"samples"}, "$.curvature");
    if (c.contains("samples")) prob.samples = static_cast<int>(integer(c["samples"], "$.curvature.samples"));
  }

  if (prob.kind == "algebra") {
    reject_unknown(j, {"kind", "derivation", "p", "q", "solver", "heat", "curvature", "comment"}, root);
    AlgebraProblem a;
    const json& dj = field(j, "derivation", root);
    std::size_t n = generator_dim(dj);
    if (n == 0 && j.contains("p")) n = literal_dim(j["p"], "$.p");
    a.derivation = parse_derivation(dj, n, "$.derivation");
    n = a.derivation.n();
    for (const char* key : {"p", "q"}) {
      if (!j.contains(key)) continue;
      const std::string kp = std::string("$.") + key;
      DensityMatrix d = parse_density(j[key], kp);
      if (d.n() != n) fail(kp, "dimension " + std::to_string(d.n()) + " differs from the generators (" + std::to_string(n) + ")");
      (key[0] == 'p' ? a.p : a.q) = std::move(d);
    }
    if (j.contains("heat")) {
      const json& h = j["heat"];
      reject_unknown(h, {"times"}, "$.heat");
      const json& t = array(field(h, "times", "$.heat"), "$.heat.times");
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double x = finite_number(t[i], at("$.heat.times", i));
        if (x < 0.0) fail(at("$.heat.times", i), "negative time");
        a.heat_times.push_back(x);
      }
    }
    prob.algebra = std::move(a);
  } else if (prob.kind == "bundle") {
    reject_unknown(j, {"kind", "base", "fibers", "P", "Q", "solver", "curvature", "comment"}, root);
    const json& b = field(j, "base", root);
    reject_unknown(b, {"weights", "labels"}, "$.base");
    const json& w = array(field(b, "weights", "$.base"), "$.base.weights");
    std::vector<double> weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
      weights.push_back(finite_number(w[i], at("$.base.weights", i)));
      if (!(weights.back() > 0.0)) fail(at("$.base.weights", i), "weight must be positive");
    }
    if (weights.empty()) fail("$.base.weights", "empty base");
    std::vector<std::string> labels;
    if (b.contains("labels")) {
      const json& l = array(b["labels"], "$.base.labels");
      if (l.size() != weights.size()) fail("$.base.labels", "expected one label per weight");
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (!l[i].is_string()) fail(at("$.base.labels", i), "expected a string");
        labels.push_back(l[i].get<std::string>());
      }
    }
    FiniteBase base(weights, labels);
    const json& f = array(field(j, "fibers", root), "$.fibers");
    if (f.size() != weights.size()) fail("$.fibers", "expected one fiber per base weight");
    std::size_t n = 0;
    for (const auto& fj : f) n = n ? n : generator_dim(fj);
    if (n == 0 && j.contains("P") && j["P"].is_array() && !j["P"].empty()) n = literal_dim(j["P"][0], "$.P[0]");
    std::vector<Derivation> ders;
    for (std::size_t i = 0; i < f.size(); ++i) {
      ders.push_back(parse_derivation(f[i], n, at("$.fibers", i)));
      n = ders.back().n();
      if (ders.back().m() != ders.front().m())
        fail(at("$.fibers", i) + ".generators", "all fibers need the same number of generators");
    }
    BundleProblem bp{VerticalGradient(base, std::move(ders)), std::nullopt, std::nullopt};
    if (j.contains("P")) bp.p = parse_fibered(j["P"], base, n, "$.P");
    if (j.contains("Q")) bp.q = parse_fibered(j["Q"], base, n, "$.Q");
    prob.bundle = std::move(bp);
  } else {
    fail("$.kind", "expected \"algebra\" or \"bundle\", got \"" + prob.kind + "\"");
  }
  return prob;
}

json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

Problem load_problem(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_problem(parse_text(ss.str(), file));
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(file, 0) == 0) throw;
    throw ParseError(file + ": " + msg);
  } catch (const Error& e) {
    throw ParseError(file + ": " + e.what());
  }
}

json transport_record(const TransportResult& r, bool with_path) {
  json out;
  out["record"] = "transport";
  out["feasible"] = r.feasible;
  out["infinite"] = !std::isfinite(r.distance);
  out["distance"] = number_json(r.distance);
  out["energy"] = number_json(r.energy);
  out["iterations"] = r.iterations;
  out["converged"] = r.converged;
  out["infeasible_component_norm"] = r.infeasible_component_norm;
  if (with_path && !r.path.densities.empty()) out["path"] = path_json(r.path);
  return out;
}

TransportResult parse_transport_record(const json& j) {
  const std::string root = "$";
  TransportResult r;
  r.feasible = boolean(field(j, "feasible", root), "$.feasible");
  r.distance = number(field(j, "distance", root), "$.distance");
  r.energy = number(field(j, "energy", root), "$.energy");
  r.iterations = static_cast<int>(integer(field(j, "iterations", root), "$.iterations"));
  r.converged = boolean(field(j, "converged", root), "$.converged");
  r.infeasible_component_norm =
      finite_number(field(j, "infeasible_component_norm", root), "$.infeasible_component_norm");
  if (boolean(field(j, "infinite", root), "$.infinite") == std::isfinite(r.distance))
    fail("$.infinite", "disagrees with the distance field");
  if (j.contains("path")) r.path = parse_path(j["path"], "$.path");
  return r;
}

json curvature_record(const CurvatureReport& r) {
  json out;
  out["record"] = "curvature";
  out["infinite"] = !std::isfinite(r.estimate);
  out["estimate"] = number_json(r.estimate);
  out["pairs_evaluated"] = r.pairs_evaluated;
  out["pairs_skipped"] = r.pairs_skipped;
  out["worst_pair_index"] = r.worst_pair_index;
  out["seed"] = r.seed;
  if (r.worst_pair) {
    out["worst_pair"]["p"] = to_json(r.worst_pair->first.matrix());
    out["worst_pair"]["q"] = to_json(r.worst_pair->second.matrix());
  }
  return out;
}

CurvatureReport parse_curvature_record(const json& j) {
  const std::string root = "$";
  CurvatureReport r;
  r.estimate = number(field(j, "estimate", root), "$.estimate");
  r.pairs_evaluated = static_cast<int>(integer(field(j, "pairs_evaluated", root), "$.pairs_evaluated"));
  r.pairs_skipped = static_cast<int>(integer(field(j, "pairs_skipped", root), "$.pairs_skipped"));
  r.worst_pair_index = static_cast<int>(integer(field(j, "worst_pair_index", root), "$.worst_pair_index"));
  const json& seed = field(j, "seed", root);
  if (!seed.is_number_unsigned()) fail("$.seed", "expected a nonnegative integer");
  r.seed = seed.get<std::uint64_t>();
  if (j.contains("worst_pair")) {
    const json& w = j["worst_pair"];
    r.worst_pair.emplace(DensityMatrix(parse_hermitian(field(w, "p", "$.worst_pair"), "$.worst_pair.p").matrix()),
                         DensityMatrix(parse_hermitian(field(w, "q", "$.worst_pair"), "$.worst_pair.q").matrix()));
  }
  return r;
}

json disintegration_record(const DisintegrationResult& r, bool with_paths) {
  json out;
  out["record"] = "disintegration";
  out["feasible"] = r.feasible;
  out["infinite"] = !std::isfinite(r.total_sq);
  out["total_sq"] = number_json(r.total_sq);
  out["distance"] = number_json(std::sqrt(r.total_sq));
  out["mass_mismatch"] = r.mass_mismatch;
  out["offending_fiber"] = r.offending_fiber;
  json fibers = json::array();
  for (const auto& f : r.per_fiber) {
    json e;
    e["mass"] = f.mass;
    e["feasible"] = f.feasible;
    e["w2"] = number_json(f.w2);
    e["solved"] = f.solved;
    if (f.solved) e["result"] = transport_record(f.result, with_paths);
    fibers.push_back(std::move(e));
  }
  out["per_fiber"] = std::move(fibers);
  return out;
}

DisintegrationResult parse_disintegration_record(const json& j) {
  const std::string root = "$";
  DisintegrationResult r;
  r.feasible = boolean(field(j, "feasible", root), "$.feasible");
  r.total_sq = number(field(j, "total_sq", root), "$.total_sq");
  r.mass_mismatch = boolean(field(j, "mass_mismatch", root), "$.mass_mismatch");
  r.offending_fiber = static_cast<int>(integer(field(j, "offending_fiber", root), "$.offending_fiber"));
  const json& f = array(field(j, "per_fiber", root), "$.per_fiber");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::string fp = at("$.per_fiber", i);
    FiberRecord rec;
    rec.mass = finite_number(field(f[i], "mass", fp), fp + ".mass");
    rec.feasible = boolean(field(f[i], "feasible", fp), fp + ".feasible");
    rec.w2 = number(field(f[i], "w2", fp), fp + ".w2");
    rec.solved = boolean(field(f[i], "solved", fp), fp + ".solved");
    if (rec.solved) {
      try {
        rec.result = parse_transport_record(field(f[i], "result", fp));
      } catch (const ParseError& e) {
        throw ParseError(fp + ".result" + std::string(e.what()).substr(1));
      }
    }
    r.per_fiber.push_back(std::move(rec));
  }
  return r;
}

json mean_curvature_record(const MeanCurvatureReport& r) {
  json out;
  out["record"] = "mean_curvature";
  out["infinite"] = !std::isfinite(r.mcurv_estimate);
  out["mcurv_estimate"] = number_json(r.mcurv_estimate);
  json fe = json::array();
  for (double x : r.fiber_estimates) fe.push_back(number_json(x));
  out["fiber_estimates"] = std::move(fe);
  out["essinf_fiber"] = number_json(r.essinf_fiber);
  out["bound_satisfied"] = r.bound_satisfied;
  out["pairs_evaluated"] = r.pairs_evaluated;
  out["pairs_skipped"] = r.pairs_skipped;
  out["worst_pair_index"] = r.worst_pair_index;
  out["seed"] = r.seed;
  return out;
}

MeanCurvatureReport parse_mean_curvature_record(const json& j) {
  const std::string root = "$";
  MeanCurvatureReport r;
  r.mcurv_estimate = number(field(j, "mcurv_estimate", root), "$.mcurv_estimate");
  const json& fe = array(field(j, "fiber_estimates", root), "$.fiber_estimates");
  for (std::size_t i = 0; i < fe.size(); ++i) r.fiber_estimates.push_back(number(fe[i], at("$.fiber_estimates", i)));
  r.essinf_fiber = number(field(j, "essinf_fiber", root), "$.essinf_fiber");
  r.bound_satisfied = boolean(field(j, "bound_satisfied", root), "$.bound_satisfied");
  r.pairs_evaluated = static_cast<int>(integer(field(j, "pairs_evaluated", root), "$.pairs_evaluated"));
  r.pairs_skipped = static_cast<int>(integer(field(j, "pairs_skipped", root), "$.pairs_skipped"));
  r.worst_pair_index = static_cast<int>(integer(field(j, "worst_pair_index", root), "$.worst_pair_index"));
  const json& seed = field(j, "seed", root);
  if (!seed.is_number_unsigned()) fail("$.seed", "expected a nonnegative integer");
  r.seed = seed.get<std::uint64_t>();
  return r;
}

std::string dump(const json& j, int indent) {
  std::string out;
  write(out, j, indent, 0);
  return out;
}

}  // namespace ncot::io
