#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "pcfi/channel.hpp"
#include "pcfi/linalg.hpp"
#include "pcfi/qsd.hpp"
#include "pcfi/types.hpp"

// Seeded random generators for states, measurements, and channels. Used by
// the tests and the command-line tools; every draw is a pure function of the
// engine state, so a fixed seed reproduces the same objects bit for bit.
namespace pcfi {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller; guard the log against a zero draw.
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  std::complex<double> cgauss() { return {gauss(), gauss()}; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0;
  bool have_spare_ = false;
};

template <typename Real = double>
Vector<Real> random_unit_vector(Rng& rng, Index n) {
  Vector<Real> v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex<Real>(Real(rng.gauss()), Real(rng.gauss()));
  v /= v.norm();
  return v;
}

// Random density matrix of the given rank (0 = full rank) via a Wishart-style
// draw G G^† / tr.
template <typename Real = double>
Matrix<Real> random_density(Rng& rng, Index n, Index rank = 0) {
  if (rank <= 0 || rank > n) rank = n;
  Matrix<Real> g(n, rank);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < rank; ++j) g(i, j) = Complex<Real>(Real(rng.gauss()), Real(rng.gauss()));
  Matrix<Real> rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = ((rho + rho.adjoint()) / Real(2)).eval();
  return rho;
}

template <typename Real = double>
DensityMatrix<Real> random_bipartite(Rng& rng, Index dim_a, Index dim_b, Index rank = 0) {
  DensityMatrix<Real> rho;
  rho.dim_a = dim_a;
  rho.dim_b = dim_b;
  rho.mat = random_density<Real>(rng, dim_a * dim_b, rank);
  return rho;
}

// Haar-distributed unitary via QR of a complex Gaussian matrix with the
// standard phase fix on the R diagonal.
template <typename Real = double>
Matrix<Real> random_unitary(Rng& rng, Index n) {
  Matrix<Real> g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) g(i, j) = Complex<Real>(Real(rng.gauss()), Real(rng.gauss()));
  Eigen::HouseholderQR<Matrix<Real>> qr(g);
  Matrix<Real> q = qr.householderQ();
  Matrix<Real> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Complex<Real> d = r(j, j);
    const Real a = std::abs(d);
    if (a > Real(0)) q.col(j) *= d / a;
  }
  return q;
}

// Random POVM with k outcomes: normalize random positive operators against
// their sum, which is almost surely invertible.
template <typename Real = double>
std::vector<Matrix<Real>> random_povm(Rng& rng, Index n, Index k) {
  std::vector<Matrix<Real>> raw;
  raw.reserve(static_cast<std::size_t>(k));
  Matrix<Real> s = Matrix<Real>::Zero(n, n);
  for (Index i = 0; i < k; ++i) {
    Matrix<Real> g(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) g(r, c) = Complex<Real>(Real(rng.gauss()), Real(rng.gauss()));
    Matrix<Real> pos = g * g.adjoint();
    s += pos;
    raw.push_back(std::move(pos));
  }
  HermEig<Real> eig = herm_eig(s);
  Matrix<Real> inv_sqrt = Matrix<Real>::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    inv_sqrt += eig.vectors.col(j) * eig.vectors.col(j).adjoint() / std::sqrt(eig.values[j]);
  std::vector<Matrix<Real>> povm;
  povm.reserve(raw.size());
  for (auto& el : raw) {
    Matrix<Real> mi = inv_sqrt * el * inv_sqrt;
    povm.push_back(((mi + mi.adjoint()) / Real(2)).eval());
  }
  return povm;
}

// Random valid parametrization channel mixing two structural families:
//  - permutation elements (injective target maps contribute nothing to any
//    off-diagonal completeness sum, so their coefficients, phases, and phase
//    slopes are free), and
//  - harmonic triples on a basis pair (three elements whose cube-root-phase
//    coefficients cancel that pair's off-diagonal sum for every parameter
//    value; the three share one phase-slope vector).
// Afterwards each basis index's total squared coefficient budget is scaled
// to exactly 1. Per-index scaling leaves every vanishing off-diagonal sum at
// zero, so validity is preserved. Coefficient magnitudes are floored away
// from zero, which keeps every budget strictly positive before scaling.
template <typename Real = double>
PioChannel<Real> random_g_channel(Rng& rng, Index n_a, Index n_perm = 2, Index n_triples = 0) {
  if (n_a < 1) throw ValidationError("random_g_channel: n_a must be positive");
  if (n_triples < 0) n_triples = 0;
  if (n_perm < 1) n_perm = 1;
  PioChannel<Real> ch;
  ch.dim_a = n_a;

  std::vector<Index> perm(static_cast<std::size_t>(n_a));
  for (Index i = 0; i < n_a; ++i) perm[static_cast<std::size_t>(i)] = i;

  for (Index e = 0; e < n_perm; ++e) {
    // Fisher-Yates shuffle driven by the shared engine.
    for (Index i = n_a - 1; i > 0; --i) {
      const Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    KrausElement<Real> el;
    el.targets = perm;
    el.coeffs = Vector<Real>(n_a);
    el.phase0 = RealVector<Real>(n_a);
    el.deriv = RealVector<Real>(n_a);
    for (Index n = 0; n < n_a; ++n) {
      const Real mag = Real(0.25) + std::abs(Real(rng.gauss()));
      el.coeffs[n] = std::polar(mag, Real(2 * kPi * rng.uniform() - kPi));
      el.phase0[n] = Real(2 * kPi * rng.uniform() - kPi);
      el.deriv[n] = Real(rng.uniform());
    }
    ch.elements.push_back(std::move(el));
  }

  for (Index t3 = 0; t3 < n_triples && n_a >= 2; ++t3) {
    const Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_a)));
    Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_a - 1)));
    if (j >= i) ++j;
    const Real wi = Real(0.25) + std::abs(Real(rng.gauss()));
    const Real wj = Real(0.25) + std::abs(Real(rng.gauss()));
    const Real phi_i = Real(2 * kPi * rng.uniform() - kPi);
    const Real phi_j = Real(2 * kPi * rng.uniform() - kPi);
    RealVector<Real> deriv(n_a);
    RealVector<Real> phase0 = RealVector<Real>::Zero(n_a);
    for (Index n = 0; n < n_a; ++n) deriv[n] = Real(rng.uniform());
    phase0[i] = phi_i;
    phase0[j] = phi_j;
    const Index target = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n_a)));
    for (int t = 0; t < 3; ++t) {
      KrausElement<Real> el;
      el.targets.assign(static_cast<std::size_t>(n_a), target);
      el.coeffs = Vector<Real>::Zero(n_a);
      el.phase0 = phase0;
      el.deriv = deriv;
      el.coeffs[i] = wi * std::polar(Real(1), Real(-2 * kPi * t) / Real(3));
      el.coeffs[j] = wj * std::polar(Real(1), Real(2 * kPi * t) / Real(3));
      ch.elements.push_back(std::move(el));
    }
  }

  // Scale each index's coefficient budget to 1.
  RealVector<Real> budget = RealVector<Real>::Zero(n_a);
  for (const auto& el : ch.elements)
    for (Index n = 0; n < n_a; ++n) budget[n] += std::norm(el.coeffs[n]);
  for (auto& el : ch.elements)
    for (Index n = 0; n < n_a; ++n) el.coeffs[n] /= std::sqrt(budget[n]);

  require_valid_channel(ch);
  return ch;
}

// Random state that is block diagonal across the first subsystem (invariant
// under the dephasing pinch), drawn by pinching a generic random state and
// renormalizing. The pinch of a positive operator stays positive.
template <typename Real = double>
DensityMatrix<Real> random_partial_incoherent(Rng& rng, Index dim_a, Index dim_b) {
  DensityMatrix<Real> rho = random_bipartite<Real>(rng, dim_a, dim_b);
  rho.mat = luders_dephase(rho.mat, dim_a, dim_b);
  rho.mat /= rho.mat.trace().real();
  return rho;
}

// Random state whose reduced first-subsystem state is exactly diagonal.
// Alternates between pinched mixed states and pure entangled states
// sum_a sqrt(q_a) |a>|chi_a> with orthonormal {chi_a}; the latter have a
// diagonal marginal while being far from block diagonal themselves.
template <typename Real = double>
DensityMatrix<Real> random_diag_reduced(Rng& rng, Index dim_a, Index dim_b, bool prefer_pure) {
  if (!prefer_pure || dim_b < dim_a) return random_partial_incoherent<Real>(rng, dim_a, dim_b);
  Matrix<Real> u = random_unitary<Real>(rng, dim_b);
  RealVector<Real> q(dim_a);
  Real sum = 0;
  for (Index a = 0; a < dim_a; ++a) {
    q[a] = Real(0.05) + Real(rng.uniform());
    sum += q[a];
  }
  q /= sum;
  Vector<Real> psi = Vector<Real>::Zero(dim_a * dim_b);
  for (Index a = 0; a < dim_a; ++a)
    for (Index b = 0; b < dim_b; ++b) psi[a * dim_b + b] += std::sqrt(q[a]) * u(b, a);
  DensityMatrix<Real> rho;
  rho.dim_a = dim_a;
  rho.dim_b = dim_b;
  rho.mat = psi * psi.adjoint();
  return rho;
}

// Random state whose reduced first-subsystem state has at least one
// off-diagonal entry of magnitude > min_offdiag. Rejection sampling with a
// deterministic product-state fallback that always satisfies the bound.
template <typename Real = double>
DensityMatrix<Real> random_offdiag_state(Rng& rng, Index dim_a, Index dim_b,
                                         Real min_offdiag = Real(0.05)) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    DensityMatrix<Real> rho = random_bipartite<Real>(rng, dim_a, dim_b);
    Matrix<Real> ra = partial_trace_b(rho);
    Real best = 0;
    for (Index i = 0; i < dim_a; ++i)
      for (Index j = i + 1; j < dim_a; ++j) best = std::max(best, std::abs(ra(i, j)));
    if (best > min_offdiag) return rho;
  }
  // Fallback: |psi_A> with uniform magnitudes has off-diagonals of size 1/dim_a.
  Vector<Real> a(dim_a);
  for (Index i = 0; i < dim_a; ++i)
    a[i] = std::polar(Real(1) / std::sqrt(Real(dim_a)),
                      Real(2 * kPi * rng.uniform() - kPi));
  Vector<Real> b = random_unit_vector<Real>(rng, dim_b);
  Vector<Real> psi(dim_a * dim_b);
  for (Index i = 0; i < dim_a; ++i)
    for (Index j = 0; j < dim_b; ++j) psi[i * dim_b + j] = a[i] * b[j];
  DensityMatrix<Real> rho;
  rho.dim_a = dim_a;
  rho.dim_b = dim_b;
  rho.mat = psi * psi.adjoint();
  return rho;
}

// Random discrimination ensemble with priors bounded away from zero.
template <typename Real = double>
QsdEnsemble<Real> random_ensemble(Rng& rng, Index m, Index n, bool pure_states = false) {
  QsdEnsemble<Real> ens;
  ens.priors = RealVector<Real>(m);
  Real sum = 0;
  for (Index i = 0; i < m; ++i) {
    ens.priors[i] = Real(0.1) + Real(rng.uniform());
    sum += ens.priors[i];
  }
  ens.priors /= sum;
  for (Index i = 0; i < m; ++i) {
    if (pure_states) {
      Vector<Real> v = random_unit_vector<Real>(rng, n);
      ens.states.push_back(v * v.adjoint());
    } else {
      ens.states.push_back(random_density<Real>(rng, n));
    }
  }
  return ens;
}

}  // namespace pcfi
