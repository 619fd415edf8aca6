#include "ncot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "ncot/errors.hpp"
#include "ncot/hermitian_basis.hpp"
#include "ncot/random.hpp"

namespace ncot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const cplx kI{0.0, 1.0};

std::vector<double> floored(const std::vector<double>& lam, double floor) {
  std::vector<double> out(lam);
  for (double& l : out) l = std::max(l, floor);
  return out;
}

// Dense real symmetric positive semidefinite solve with either a Cholesky
// factor or, when a pivot is too small, an eigendecomposition with cutoff.
class SpdSolver {
 public:
  explicit SpdSolver(const RMatrix& g) : r_(g.rows()) {
    double maxdiag = 0.0;
    for (std::size_t i = 0; i < r_; ++i) maxdiag = std::max(maxdiag, g(i, i));
    scale_ = maxdiag;
    if (r_ == 0 || maxdiag <= 0.0) {
      degenerate_ = true;
      return;
    }
    chol_ = g;
    for (std::size_t j = 0; j < r_; ++j) {
      double s = chol_(j, j);
      for (std::size_t k = 0; k < j; ++k) s -= chol_(j, k) * chol_(j, k);
      if (!(s > kOnsagerCutoff * maxdiag)) {
        use_eig_ = true;
        break;
      }
      const double l = std::sqrt(s);
      chol_(j, j) = l;
      for (std::size_t i = j + 1; i < r_; ++i) {
        double t = chol_(i, j);
        for (std::size_t k = 0; k < j; ++k) t -= chol_(i, k) * chol_(j, k);
        chol_(i, j) = t / l;
      }
    }
    if (use_eig_) {
      eig_ = eig_symmetric(g);
      cutoff_ = kOnsagerCutoff * std::max(eig_.eigenvalues.back(), 0.0);
    }
  }

  // Minimum-norm solution on the retained range; `dropped` receives the norm
  // of the right-hand side outside that range.
  std::vector<double> solve(const std::vector<double>& b, double* dropped) const {
    std::vector<double> x(r_, 0.0);
    if (degenerate_) {
      *dropped = norm2(b);
      return x;
    }
    if (!use_eig_) {
      *dropped = 0.0;
      for (std::size_t i = 0; i < r_; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol_(i, k) * x[k];
        x[i] = s / chol_(i, i);
      }
      for (std::size_t i = r_; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < r_; ++k) s -= chol_(k, i) * x[k];
        x[i] = s / chol_(i, i);
      }
      return x;
    }
    double out = 0.0;
    for (std::size_t c = 0; c < r_; ++c) {
      double proj = 0.0;
      for (std::size_t i = 0; i < r_; ++i) proj += eig_.eigenvectors(i, c) * b[i];
      if (eig_.eigenvalues[c] > cutoff_) {
        const double w = proj / eig_.eigenvalues[c];
        for (std::size_t i = 0; i < r_; ++i) x[i] += w * eig_.eigenvectors(i, c);
      } else {
        out += proj * proj;
      }
    }
    *dropped = std::sqrt(out);
    return x;
  }

 private:
  std::size_t r_;
  double scale_ = 0.0;
  bool degenerate_ = false;
  bool use_eig_ = false;
  RMatrix chol_;
  RealSpectralDecomposition eig_;
  double cutoff_ = 0.0;
};

std::vector<double> symv(const RMatrix& g, const std::vector<double>& x) { return matvec(g, x); }

// Discretized problem restricted to the affine set rho_j = lin_j + sum_a z_ja B_a,
// B_a an orthonormal basis of (ker grad)^perp among Hermitian matrices.
class Problem {
 public:
  Problem(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q, int steps,
          double feas_tol)
      : d_(d), n_(d.n()), m_(d.m()), steps_(steps), dt_(1.0 / steps), feas_tol_(feas_tol),
        p_(p.matrix()), q_(q.matrix()) {
    const HermitianSplit& split = d.hermitian_split();
    r_ = split.range_dim();
    basis_t_ = RMatrix(r_, split.range_basis.rows());
    for (std::size_t a = 0; a < r_; ++a)
      for (std::size_t i = 0; i < split.range_basis.rows(); ++i) basis_t_(a, i) = split.range_basis(i, a);
    for (std::size_t a = 0; a < r_; ++a) {
      std::vector<double> col(basis_t_.row(a), basis_t_.row(a) + basis_t_.cols());
      basis_.push_back(from_hermitian_coords(col, n_));
      for (std::size_t k = 0; k < m_; ++k) grads_.push_back(d.grad_component(k, basis_.back()));
    }
    const std::vector<double> dq = hermitian_coords(q_ - p_);
    c_ = project(dq);
  }

  std::size_t r() const { return r_; }
  std::size_t dim() const { return static_cast<std::size_t>(steps_ - 1) * r_; }
  double dt() const { return dt_; }
  const std::vector<double>& endpoint_difference() const { return c_; }

  std::vector<double> project(const std::vector<double>& h) const { return matvec(basis_t_, h); }

  CMatrix lin(int j) const {
    const double t = static_cast<double>(j) / steps_;
    return (1.0 - t) * p_ + t * q_;
  }

  CMatrix node(const std::vector<double>& z, int j) const {
    CMatrix rho = lin(j);
    if (j == 0 || j == steps_) return rho;
    const double* zj = z.data() + static_cast<std::size_t>(j - 1) * r_;
    for (std::size_t a = 0; a < r_; ++a)
      if (zj[a] != 0.0) rho.add_scaled(zj[a], basis_[a]);
    return rho;
  }

  CMatrix from_coords(const std::vector<double>& u) const {
    CMatrix out(n_);
    for (std::size_t a = 0; a < r_; ++a) out.add_scaled(u[a], basis_[a]);
    return out;
  }

  struct Step {
    bool ok = false;
    double energy = 0.0;
    double dropped = 0.0;
    std::vector<double> u;      // G^+ d in basis coordinates
    std::vector<double> gamma;  // gradient of <u, G(.) u> at the midpoint
  };

  // One time step: midpoint matrix and the step increment in coordinates.
  Step step(const CMatrix& mid, const std::vector<double>& dcoords, bool want_gamma) const {
    Step out;
    const SpectralDecomposition s = eig(HermitianMatrix(mid));
    const std::vector<double> lam = floored(s.eigenvalues, kSolverEigenvalueFloor);
    const CMatrix& v = s.eigenvectors;
    const std::size_t nn = n_ * n_;

    std::vector<double> sq(nn);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) sq[i * n_ + j] = std::sqrt(log_mean(lam[i], lam[j]));

    // c[a] holds the m blocks V^* grad_k(B_a) V, w[a] the same scaled by sqrt(L).
    const std::size_t block = m_ * nn;
    std::vector<cplx> c(r_ * block), w(r_ * block);
    const auto& kt = kernels::active();
    for (std::size_t a = 0; a < r_; ++a)
      for (std::size_t k = 0; k < m_; ++k) {
        const CMatrix ct = adjoint_times(v, grads_[a * m_ + k] * v);
        cplx* dst = c.data() + a * block + k * nn;
        std::copy(ct.data().begin(), ct.data().end(), dst);
        kt.cscale_real(nn, sq.data(), dst, w.data() + a * block + k * nn);
      }
    RMatrix g(r_, r_);
    for (std::size_t a = 0; a < r_; ++a)
      for (std::size_t b = a; b < r_; ++b) {
        const double val = kt.cdotc(block, w.data() + a * block, w.data() + b * block).real();
        g(a, b) = val;
        g(b, a) = val;
      }

    const SpdSolver solver(g);
    double dropped = 0.0;
    out.u = solver.solve(dcoords, &dropped);
    // One step of iterative refinement keeps the continuity residual small.
    {
      const std::vector<double> gu = symv(g, out.u);
      std::vector<double> res(r_);
      for (std::size_t a = 0; a < r_; ++a) res[a] = dcoords[a] - gu[a];
      double ignored = 0.0;
      const std::vector<double> corr = solver.solve(res, &ignored);
      for (std::size_t a = 0; a < r_; ++a) out.u[a] += corr[a];
    }
    out.dropped = dropped;
    if (dropped > feas_tol_) return out;
    out.energy = std::max(dot(dcoords, out.u), 0.0) / (2.0 * dt_);
    out.ok = std::isfinite(out.energy);
    if (!want_gamma || !out.ok) return out;

    // Divided differences of L in its first slot, D1(i, j; l).
    std::vector<double> d1(n_ * n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t l = 0; l < n_; ++l)
          d1[(i * n_ + j) * n_ + l] = log_mean_divided_difference(lam[i], lam[j], lam[l]);

    CMatrix gt(n_);
    std::vector<cplx> at(nn);
    for (std::size_t k = 0; k < m_; ++k) {
      std::fill(at.begin(), at.end(), cplx(0.0));
      for (std::size_t a = 0; a < r_; ++a)
        if (out.u[a] != 0.0) kt.caxpy(nn, out.u[a], c.data() + a * block + k * nn, at.data());
      auto A = [&](std::size_t i, std::size_t j) { return at[i * n_ + j]; };
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
          cplx c1 = 0.0, c2 = 0.0;
          for (std::size_t l = 0; l < n_; ++l) {
            c1 += d1[(i * n_ + j) * n_ + l] * std::conj(A(i, l)) * A(j, l);
            c2 += d1[(i * n_ + j) * n_ + l] * std::conj(A(l, j)) * A(l, i);
          }
          const cplx cc = c1 + c2;
          gt(i, j) += 0.5 * std::conj(cc);
          gt(j, i) += 0.5 * cc;
        }
    }
    const CMatrix gamma = v * times_adjoint(gt, v);
    out.gamma = project(hermitian_coords(hermitian_part(gamma)));
    return out;
  }

  struct Eval {
    bool ok = false;
    double energy = kInf;
    double dropped = 0.0;
    std::vector<double> grad;
    std::vector<Step> steps;
  };

  std::vector<double> increment(const std::vector<double>& z, int j) const {
    std::vector<double> d(r_);
    for (std::size_t a = 0; a < r_; ++a) d[a] = c_[a] * dt_;
    if (j < steps_) {
      const double* zj = z.data() + static_cast<std::size_t>(j - 1) * r_;
      for (std::size_t a = 0; a < r_; ++a) d[a] += zj[a];
    }
    if (j > 1) {
      const double* zp = z.data() + static_cast<std::size_t>(j - 2) * r_;
      for (std::size_t a = 0; a < r_; ++a) d[a] -= zp[a];
    }
    return d;
  }

  bool positive(const std::vector<double>& z) const {
    for (int j = 1; j < steps_; ++j) {
      const SpectralDecomposition s = eig(HermitianMatrix(node(z, j)));
      if (s.eigenvalues.front() < -1e-14) return false;
    }
    return true;
  }

  Eval evaluate(const std::vector<double>& z, bool want_grad) const {
    Eval e;
    if (!positive(z)) return e;
    e.energy = 0.0;
    std::vector<CMatrix> nodes;
    nodes.reserve(steps_ + 1);
    for (int j = 0; j <= steps_; ++j) nodes.push_back(node(z, j));
    for (int j = 1; j <= steps_; ++j) {
      const CMatrix mid = 0.5 * (nodes[j - 1] + nodes[j]);
      Step s = step(mid, increment(z, j), want_grad);
      e.dropped = std::max(e.dropped, s.dropped);
      if (!s.ok) {
        e.energy = kInf;
        return e;
      }
      e.energy += s.energy;
      e.steps.push_back(std::move(s));
    }
    e.ok = true;
    if (!want_grad) return e;
    e.grad.assign(dim(), 0.0);
    const double inv = 1.0 / (2.0 * dt_);
    for (int j = 1; j < steps_; ++j) {
      const Step& left = e.steps[j - 1];
      const Step& right = e.steps[j];
      double* gj = e.grad.data() + static_cast<std::size_t>(j - 1) * r_;
      for (std::size_t a = 0; a < r_; ++a)
        gj[a] = inv * (2.0 * left.u[a] - 2.0 * right.u[a] - 0.5 * (left.gamma[a] + right.gamma[a]));
    }
    return e;
  }

  TransportPath build_path(const std::vector<double>& z, const Eval& e) const {
    TransportPath path;
    path.steps = steps_;
    for (int j = 0; j <= steps_; ++j) path.densities.emplace_back(node(z, j));
    for (int j = 1; j <= steps_; ++j) {
      const Step& s = e.steps[j - 1];
      path.potentials.emplace_back((1.0 / dt_) * from_coords(s.u));
      path.step_energies.push_back(s.energy);
    }
    return path;
  }

 private:
  const Derivation& d_;
  std::size_t n_, m_, r_ = 0;
  int steps_;
  double dt_;
  double feas_tol_;
  CMatrix p_, q_;
  RMatrix basis_t_;             // r x n^2, rows are basis coordinates
  std::vector<CMatrix> basis_;  // B_a
  std::vector<CMatrix> grads_;  // grad_k(B_a) at index a*m + k
  std::vector<double> c_;       // coordinates of q - p
};

struct Minimum {
  std::vector<double> z;
  Problem::Eval eval;
  int iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with Armijo backtracking. Trial points that leave the
// positive cone or make a step infeasible have infinite energy and are
// rejected by the backtracking loop.
Minimum lbfgs(const Problem& prob, std::vector<double> z, const SolverConfig& cfg) {
  constexpr std::size_t kMemory = 8;
  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;

  Minimum out;
  Problem::Eval cur = prob.evaluate(z, true);
  if (!cur.ok) {
    out.z = std::move(z);
    out.eval = std::move(cur);
    return out;
  }
  std::deque<std::pair<std::vector<double>, std::vector<double>>> mem;
  std::deque<double> rho;
  int stall = 0;
  int it = 0;
  bool converged = false;
  const std::size_t dim = z.size();

  while (it < cfg.max_iters) {
    if (cur.energy == 0.0 || norm2(cur.grad) <= 1e-300) {
      converged = true;
      break;
    }
    // Two-loop recursion.
    std::vector<double> dir(cur.grad);
    std::vector<double> alpha(mem.size());
    for (std::size_t i = mem.size(); i-- > 0;) {
      alpha[i] = rho[i] * dot(mem[i].first, dir);
      for (std::size_t k = 0; k < dim; ++k) dir[k] -= alpha[i] * mem[i].second[k];
    }
    if (!mem.empty()) {
      const auto& [s, y] = mem.back();
      const double gamma = dot(s, y) / dot(y, y);
      for (double& x : dir) x *= gamma;
    }
    for (std::size_t i = 0; i < mem.size(); ++i) {
      const double beta = rho[i] * dot(mem[i].second, dir);
      for (std::size_t k = 0; k < dim; ++k) dir[k] += (alpha[i] - beta) * mem[i].first[k];
    }
    for (double& x : dir) x = -x;
    double slope = dot(cur.grad, dir);
    if (!(slope < 0.0)) {
      mem.clear();
      rho.clear();
      dir = cur.grad;
      for (double& x : dir) x = -x;
      slope = dot(cur.grad, dir);
    }

    bool steepest = mem.empty();
    double step = steepest ? std::min(1.0, 1.0 / norm2(cur.grad)) : 1.0;
    Problem::Eval next;
    std::vector<double> trial(dim);
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      for (std::size_t k = 0; k < dim; ++k) trial[k] = z[k] + step * dir[k];
      next = prob.evaluate(trial, true);
      if (next.ok && next.energy <= cur.energy + kArmijo * step * slope) {
        accepted = true;
        break;
      }
    }
    ++it;
    if (!accepted) {
      if (!steepest) {
        mem.clear();
        rho.clear();
        continue;
      }
      converged = true;  // no descent possible at working precision
      break;
    }

    std::vector<double> s(dim), y(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      s[k] = trial[k] - z[k];
      y[k] = next.grad[k] - cur.grad[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-16 * norm2(s) * norm2(y)) {
      mem.emplace_back(std::move(s), std::move(y));
      rho.push_back(1.0 / sy);
      if (mem.size() > kMemory) {
        mem.pop_front();
        rho.pop_front();
      }
    }
    const double decrease = (cur.energy - next.energy) / std::max(cur.energy, 1e-300);
    z = trial;
    cur = std::move(next);
    stall = decrease < cfg.tol ? stall + 1 : 0;
    if (stall >= cfg.patience) {
      converged = true;
      break;
    }
  }
  out.z = std::move(z);
  out.eval = std::move(cur);
  out.iterations = it;
  out.converged = converged;
  return out;
}

// Interior start (1 - s) lin_j + s E(p), E the trace-preserving projection onto
// ker grad. The F-coordinates of E(p) - lin_j are -P_F(lin_j).
std::vector<double> blended_start(const Problem& prob, int steps, double s) {
  std::vector<double> z(prob.dim());
  for (int j = 1; j < steps; ++j) {
    const std::vector<double> lc = prob.project(hermitian_coords(prob.lin(j)));
    for (std::size_t a = 0; a < prob.r(); ++a)
      z[static_cast<std::size_t>(j - 1) * prob.r() + a] = -s * lc[a];
  }
  return z;
}

TransportResult infeasible_result(double norm) {
  TransportResult r;
  r.feasible = false;
  r.distance = kInf;
  r.energy = kInf;
  r.converged = true;
  r.infeasible_component_norm = norm;
  return r;
}

TransportPath constant_path(const DensityMatrix& p, int steps) {
  TransportPath path;
  path.steps = steps;
  path.densities.assign(steps + 1, p);
  path.potentials.assign(steps, HermitianMatrix::zero(p.n()));
  path.step_energies.assign(steps, 0.0);
  return path;
}

void check_pair(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q) {
  if (p.n() != d.n() || q.n() != d.n()) throw DimensionError("transport: dimension mismatch");
}

}  // namespace

void validate(const SolverConfig& c) {
  if (c.steps < 1) throw UsageError("solver.steps must be >= 1");
  if (!(c.tol > 0.0)) throw UsageError("solver.tol must be positive");
  if (c.max_iters < 0) throw UsageError("solver.max_iters must be >= 0");
  if (c.patience < 1) throw UsageError("solver.patience must be >= 1");
  if (!(c.feas_tol > 0.0)) throw UsageError("solver.feas_tol must be positive");
  if (c.restarts < 0) throw UsageError("solver.restarts must be >= 0");
}

double TransportPath::energy() const {
  double e = 0.0;
  for (double x : step_energies) e += x;
  return e;
}

CMatrix onsager_apply(const Derivation& d, const SpectralDecomposition& p, const CMatrix& x,
                      double floor) {
  const std::size_t n = d.n();
  if (p.n() != n || x.rows() != n) throw DimensionError("onsager: dimension mismatch");
  const std::vector<double> lam = floored(p.eigenvalues, floor);
  const CMatrix& v = p.eigenvectors;
  CMatrix out(n);
  for (std::size_t k = 0; k < d.m(); ++k) {
    const CMatrix t = adjoint_times(v, d.generators()[k].matrix() * v);
    const CMatrix xt = adjoint_times(v, x * v);
    CMatrix g = kI * commutator(t, xt);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) *= log_mean(std::max(lam[i], 0.0), std::max(lam[j], 0.0));
    out.add_scaled(-kI, commutator(t, g));
  }
  return v * times_adjoint(out, v);
}

double tangent_metric(const Derivation& d, const DensityMatrix& p, const HermitianMatrix& a,
                      const HermitianMatrix& b) {
  if (a.n() != d.n() || b.n() != d.n() || p.n() != d.n())
    throw DimensionError("tangent_metric: dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < d.m(); ++k) {
    const CMatrix ga = d.grad_component(k, a.matrix());
    const CMatrix gb = d.grad_component(k, b.matrix());
    s += hs_inner(apply_mult_op(p.spectrum(), ga), gb).real();
  }
  return s;
}

Superoperator onsager(const Derivation& d, const DensityMatrix& p) {
  if (p.n() != d.n()) throw DimensionError("onsager: dimension mismatch");
  return Superoperator::from_map(d.n(), [&](const CMatrix& x) { return onsager_apply(d, p.spectrum(), x); });
}

Superoperator s_operator(const Derivation& d, const DensityMatrix& p) {
  const Superoperator g = onsager(d, p);
  const SpectralDecomposition s = g.eigh();
  const double cutoff = kOnsagerCutoff * std::max(s.eigenvalues.back(), 0.0);
  const std::size_t nn = s.n();
  CMatrix scaled = s.eigenvectors;
  for (std::size_t c = 0; c < nn; ++c) {
    const double l = s.eigenvalues[c] > cutoff ? s.eigenvalues[c] : 1.0;
    for (std::size_t r = 0; r < nn; ++r) scaled(r, c) *= l;
  }
  return Superoperator(d.n(), times_adjoint(scaled, s.eigenvectors));
}

LinearPathResult linear_path(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q,
                             int steps, double feas_tol) {
  check_pair(d, p, q);
  if (steps < 1) throw UsageError("linear_path: steps must be >= 1");
  LinearPathResult out;
  const std::size_t n = d.n();
  const CMatrix diff = q.matrix() - p.matrix();
  const double dt = 1.0 / steps;
  TransportPath path;
  path.steps = steps;
  for (int j = 0; j <= steps; ++j) {
    const double t = static_cast<double>(j) / steps;
    path.densities.emplace_back((1.0 - t) * p.matrix() + t * q.matrix());
  }
  for (int j = 1; j <= steps; ++j) {
    const double t = (j - 0.5) / steps;
    const DensityMatrix mid((1.0 - t) * p.matrix() + t * q.matrix());
    const SpectralDecomposition gs = onsager(d, mid).eigh();
    const double cutoff = kOnsagerCutoff * std::max(gs.eigenvalues.back(), 0.0);
    const std::vector<cplx> b = vectorize(diff);
    std::vector<cplx> u(n * n), kernel_part(n * n);
    const CMatrix vt = gs.eigenvectors.adjoint();
    const auto& kt = kernels::active();
    for (std::size_t c = 0; c < n * n; ++c) {
      const cplx proj = kt.cdotu(n * n, vt.row(c), b.data());
      std::vector<cplx> col(n * n);
      for (std::size_t r = 0; r < n * n; ++r) col[r] = gs.eigenvectors(r, c);
      if (gs.eigenvalues[c] > cutoff) {
        kt.caxpy(n * n, proj / gs.eigenvalues[c], col.data(), u.data());
      } else {
        kt.caxpy(n * n, proj, col.data(), kernel_part.data());
      }
    }
    const CMatrix obstruction = unvectorize(kernel_part, n);
    const double onorm = hs_norm(obstruction);
    if (onorm > feas_tol) {
      out.obstruction = obstruction;
      out.obstruction_norm = onorm;
      out.failing_step = j;
      return out;
    }
    const HermitianMatrix pot(unvectorize(u, n));
    const CMatrix gu = onsager_apply(d, mid.spectrum(), pot.matrix());
    path.potentials.push_back(pot);
    path.step_energies.push_back(0.5 * dt * std::max(hs_inner(gu, pot.matrix()).real(), 0.0));
  }
  out.path = std::move(path);
  return out;
}

TransportResult solve_geodesic(const Derivation& d, const DensityMatrix& p, const DensityMatrix& q,
                               const SolverConfig& config) {
  validate(config);
  check_pair(d, p, q);
  const int steps = config.steps;

  // Kernel components of q - p are conserved along every admissible path.
  const HermitianSplit& split = d.hermitian_split();
  const std::vector<double> dq = hermitian_coords(q.matrix() - p.matrix());
  double knorm = 0.0;
  for (std::size_t c = 0; c < split.kernel_dim(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < dq.size(); ++i) s += split.kernel_basis(i, c) * dq[i];
    knorm += s * s;
  }
  knorm = std::sqrt(knorm);
  if (knorm > config.feas_tol) return infeasible_result(knorm);

  const Problem prob(d, p, q, steps, config.feas_tol);
  if (prob.r() == 0 || norm2(prob.endpoint_difference()) == 0.0) {
    TransportResult r;
    r.feasible = true;
    r.converged = true;
    r.path = constant_path(p, steps);
    r.infeasible_component_norm = knorm;
    return r;
  }

  std::vector<double> start(prob.dim(), 0.0);
  Problem::Eval init = prob.evaluate(start, false);
  double worst_dropped = init.dropped;
  for (double s : {1e-3, 1e-2, 1e-1, 0.5, 1.0}) {
    if (init.ok) break;
    start = blended_start(prob, steps, s);
    init = prob.evaluate(start, false);
    worst_dropped = std::max(worst_dropped, init.dropped);
  }
  if (!init.ok) return infeasible_result(std::max(knorm, worst_dropped));

  Minimum best = lbfgs(prob, start, config);
  int total_iters = best.iterations;
  for (int k = 1; k <= config.restarts; ++k) {
    Rng rng = make_rng(config.seed, static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> unif(0.05, 0.9);
    Minimum trial = lbfgs(prob, blended_start(prob, steps, unif(rng)), config);
    total_iters += trial.iterations;
    if (trial.eval.ok && trial.eval.energy < best.eval.energy) best = std::move(trial);
  }
  if (!best.eval.ok) return infeasible_result(std::max(knorm, best.eval.dropped));

  const Problem::Eval final_eval = prob.evaluate(best.z, false);
  TransportResult r;
  r.feasible = true;
  r.path = prob.build_path(best.z, final_eval);
  r.energy = r.path.energy();
  r.distance = std::sqrt(r.energy);
  r.iterations = total_iters;
  r.converged = best.converged;
  r.infeasible_component_norm = std::max(knorm, final_eval.dropped);
  return r;
}

DiscreteEnergy discrete_energy(const Derivation& d, const std::vector<HermitianMatrix>& nodes,
                               double feas_tol) {
  if (nodes.size() < 2) throw InvalidPathError("discrete_energy: need at least two nodes");
  const int steps = static_cast<int>(nodes.size()) - 1;
  const DensityMatrix p(nodes.front()), q(nodes.back());
  check_pair(d, p, q);
  const Problem prob(d, p, q, steps, feas_tol);
  std::vector<double> z(prob.dim());
  for (int j = 1; j < steps; ++j) {
    const std::vector<double> zj = prob.project(hermitian_coords(nodes[j].matrix() - prob.lin(j)));
    std::copy(zj.begin(), zj.end(), z.begin() + static_cast<std::ptrdiff_t>((j - 1) * prob.r()));
  }
  DiscreteEnergy out;
  const Problem::Eval e = prob.evaluate(z, true);
  out.feasible = e.ok;
  out.energy = e.energy;
  if (!e.ok) return out;
  for (int j = 1; j < steps; ++j) {
    const std::vector<double> g(e.grad.begin() + static_cast<std::ptrdiff_t>((j - 1) * prob.r()),
                                e.grad.begin() + static_cast<std::ptrdiff_t>(j * prob.r()));
    out.gradient.emplace_back(prob.from_coords(g));
  }
  return out;
}

double path_energy(const Derivation& d, const TransportPath& path, double feas_tol) {
  if (path.steps < 1 || path.densities.size() != static_cast<std::size_t>(path.steps) + 1 ||
      path.potentials.size() != static_cast<std::size_t>(path.steps))
    throw InvalidPathError("path_energy: inconsistent path sizes");
  const double dt = path.dt();
  double total = 0.0;
  for (int j = 1; j <= path.steps; ++j) {
    const CMatrix delta = path.densities[j].matrix() - path.densities[j - 1].matrix();
    const HermitianMatrix mid(0.5 * (path.densities[j].matrix() + path.densities[j - 1].matrix()));
    const SpectralDecomposition s = eig(mid);
    const CMatrix& u = path.potentials[j - 1].matrix();
    const CMatrix gu = onsager_apply(d, s, u, kSolverEigenvalueFloor);
    const double residual = hs_norm(delta - dt * gu);
    const double allowed = feas_tol * hs_norm(delta) + 1e-12;
    if (residual > allowed) {
      std::ostringstream msg;
      msg << "path_energy: continuity residual " << residual << " exceeds " << allowed << " at step " << j;
      throw InvalidPathError(msg.str());
    }
    total += 0.5 * dt * std::max(hs_inner(gu, u).real(), 0.0);
  }
  return total;
}

TransportPath reversed(const TransportPath& path) {
  TransportPath out;
  out.steps = path.steps;
  out.densities.assign(path.densities.rbegin(), path.densities.rend());
  for (auto it = path.potentials.rbegin(); it != path.potentials.rend(); ++it)
    out.potentials.push_back(-1.0 * *it);
  out.step_energies.assign(path.step_energies.rbegin(), path.step_energies.rend());
  return out;
}

HermitianMatrix density_at(const TransportPath& path, double t) {
  if (path.densities.empty()) throw InvalidPathError("density_at: empty path");
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("density_at: t outside [0, 1]");
  const double x = t * path.steps;
  const int i = std::min(static_cast<int>(std::floor(x)), path.steps);
  const double theta = x - i;
  if (i == path.steps || theta == 0.0) return path.densities[i].base();
  return HermitianMatrix((1.0 - theta) * path.densities[i].matrix() + theta * path.densities[i + 1].matrix());
}

}  // namespace ncot
