#include "ncot/derivation.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "ncot/errors.hpp"
#include "ncot/hermitian_basis.hpp"

namespace ncot {

namespace {
constexpr double kKernelRelativeThreshold = 1e-9;
const cplx kI{0.0, 1.0};
}  // namespace

struct Derivation::Cache {
  std::once_flag laplacian_once;
  Superoperator laplacian;
  SpectralDecomposition spectrum;

  std::once_flag split_once;
  HermitianSplit split;
};

Derivation::Derivation(std::size_t n, std::vector<HermitianMatrix> generators)
    : n_(n), generators_(std::move(generators)), cache_(std::make_shared<Cache>()) {
  if (n == 0) throw DimensionError("Derivation: dimension must be positive");
  for (const auto& t : generators_) {
    if (t.n() != n) throw DimensionError("Derivation: generator dimension differs from n");
  }
}

CMatrix Derivation::grad_component(std::size_t k, const CMatrix& a) const {
  if (a.rows() != n_ || a.cols() != n_) throw DimensionError("grad: dimension mismatch");
  const CMatrix& t = generators_.at(k).matrix();
  return kI * commutator(t, a);
}

std::vector<CMatrix> Derivation::grad(const CMatrix& a) const {
  std::vector<CMatrix> out;
  out.reserve(m());
  for (std::size_t k = 0; k < m(); ++k) out.push_back(grad_component(k, a));
  return out;
}

CMatrix Derivation::divergence(std::span<const CMatrix> v) const {
  if (v.size() != m()) throw DimensionError("divergence: tuple length differs from m");
  CMatrix out(n_);
  for (std::size_t k = 0; k < m(); ++k) {
    if (v[k].rows() != n_ || v[k].cols() != n_) throw DimensionError("divergence: dimension mismatch");
    out.add_scaled(-kI, commutator(generators_[k].matrix(), v[k]));
  }
  return out;
}

CMatrix Derivation::laplacian_apply(const CMatrix& a) const {
  if (a.rows() != n_ || a.cols() != n_) throw DimensionError("laplacian: dimension mismatch");
  CMatrix out(n_);
  for (const auto& t : generators_) out += commutator(t.matrix(), commutator(t.matrix(), a));
  return out;
}

const Superoperator& Derivation::laplacian() const {
  std::call_once(cache_->laplacian_once, [this] {
    cache_->laplacian =
        Superoperator::from_map(n_, [this](const CMatrix& a) { return laplacian_apply(a); });
    cache_->spectrum = cache_->laplacian.eigh();
  });
  return cache_->laplacian;
}

const SpectralDecomposition& Derivation::laplacian_spectrum() const {
  laplacian();
  return cache_->spectrum;
}

double Derivation::kernel_threshold() const {
  const auto& ev = laplacian_spectrum().eigenvalues;
  return kKernelRelativeThreshold * std::max(ev.back(), 0.0);
}

const HermitianSplit& Derivation::hermitian_split() const {
  std::call_once(cache_->split_once, [this] {
    const std::size_t dim = hermitian_dimension(n_);
    std::vector<CMatrix> images;
    std::vector<CMatrix> basis;
    images.reserve(dim);
    basis.reserve(dim);
    for (std::size_t a = 0; a < dim; ++a) {
      basis.push_back(hermitian_basis_element(n_, a));
      images.push_back(laplacian_apply(basis.back()));
    }
    RMatrix rep(dim, dim);
    for (std::size_t a = 0; a < dim; ++a)
      for (std::size_t b = a; b < dim; ++b) {
        const double v = hs_inner(basis[a], images[b]).real();
        rep(a, b) = v;
        rep(b, a) = v;
      }
    const RealSpectralDecomposition s = eig_symmetric(rep);
    const double thr = kKernelRelativeThreshold * std::max(s.eigenvalues.back(), 0.0);

    std::vector<std::size_t> ker, rng;
    for (std::size_t i = 0; i < dim; ++i) (s.eigenvalues[i] <= thr ? ker : rng).push_back(i);

    HermitianSplit split;
    split.n = n_;
    split.range_basis = RMatrix(dim, rng.size());
    split.kernel_basis = RMatrix(dim, ker.size());
    for (std::size_t c = 0; c < rng.size(); ++c)
      for (std::size_t r = 0; r < dim; ++r) split.range_basis(r, c) = s.eigenvectors(r, rng[c]);
    for (std::size_t c = 0; c < ker.size(); ++c) {
      std::vector<double> col(dim);
      for (std::size_t r = 0; r < dim; ++r) {
        split.kernel_basis(r, c) = s.eigenvectors(r, ker[c]);
        col[r] = s.eigenvectors(r, ker[c]);
      }
      split.kernel_matrices.push_back(from_hermitian_coords(col, n_));
    }
    cache_->split = std::move(split);
  });
  return cache_->split;
}

std::vector<CMatrix> grad(const Derivation& d, const CMatrix& a) { return d.grad(a); }

CMatrix divergence(const Derivation& d, std::span<const CMatrix> v) { return d.divergence(v); }

Superoperator laplacian(const Derivation& d) { return d.laplacian(); }

DensityMatrix heat(const Derivation& d, const DensityMatrix& p, double t) {
  if (!(t >= 0.0)) throw DomainError("heat: time must be nonnegative");
  if (p.n() != d.n()) throw DimensionError("heat: dimension mismatch");
  if (t == 0.0) return p;
  const SpectralDecomposition& s = d.laplacian_spectrum();
  const CMatrix& v = s.eigenvectors;
  const std::vector<cplx> x = vectorize(p.matrix());
  const auto& k = kernels::active();
  std::vector<cplx> coeff(x.size());
  // coeff = V^* x, scaled by exp(-t lambda)
  const CMatrix vt = v.adjoint();
  for (std::size_t i = 0; i < x.size(); ++i) {
    coeff[i] = k.cdotu(x.size(), vt.row(i), x.data()) * std::exp(-t * std::max(s.eigenvalues[i], 0.0));
  }
  std::vector<cplx> y(x.size());
  for (std::size_t r = 0; r < x.size(); ++r) y[r] = k.cdotu(x.size(), v.row(r), coeff.data());
  return DensityMatrix(unvectorize(y, d.n()));
}

double spectral_gap(const Derivation& d) {
  const double thr = d.kernel_threshold();
  for (double l : d.laplacian_spectrum().eigenvalues) {
    if (l > thr) return l;
  }
  return 0.0;
}

ErgodicityReport is_ergodic(const Derivation& d) {
  const HermitianSplit& split = d.hermitian_split();
  return {split.kernel_dim() == 1, split.kernel_matrices};
}

cplx tuple_inner(std::span<const CMatrix> a, std::span<const CMatrix> b) {
  if (a.size() != b.size()) throw DimensionError("tuple_inner: length mismatch");
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += hs_inner(a[k], b[k]);
  return s;
}

}  // namespace ncot
