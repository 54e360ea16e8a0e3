#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pcfi/linalg.hpp"
#include "pcfi/types.hpp"

// Quantum state discrimination embedded in a single bipartite state: the
// block Gram construction, ensemble extraction by hypothesis projectors, and
// the success-probability equivalence between the two pictures.
namespace pcfi {

template <typename Real = double>
struct QsdEnsemble {
  RealVector<Real> priors;            // strictly positive, sums to 1
  std::vector<Matrix<Real>> states;   // density matrices of a common dimension

  Index size() const { return static_cast<Index>(states.size()); }
  Index dim() const { return states.empty() ? 0 : states.front().rows(); }
};

template <typename Real>
void validate_ensemble(const QsdEnsemble<Real>& ens, const Tolerances<Real>& tol = {}) {
  if (ens.size() == 0) throw ValidationError("ensemble: no hypotheses");
  if (ens.priors.size() != ens.size())
    throw ValidationError("ensemble: prior count does not match state count");
  Real sum = 0;
  for (Index i = 0; i < ens.priors.size(); ++i) {
    if (!(ens.priors[i] > Real(0)))
      throw ValidationError("ensemble: prior " + std::to_string(i) + " is not positive");
    sum += ens.priors[i];
  }
  if (std::abs(sum - Real(1)) > tol.trace)
    throw ValidationError("ensemble: priors sum to " + std::to_string(double(sum)) +
                          ", expected 1");
  const Index n = ens.dim();
  for (Index i = 0; i < ens.size(); ++i) {
    const Matrix<Real>& s = ens.states[static_cast<std::size_t>(i)];
    if (s.rows() != n || s.cols() != n)
      throw ValidationError("ensemble: state " + std::to_string(i) + " has mismatched dimension");
    validate_density(s, Index(1), n, tol);
  }
}

// The bipartite state whose (i, j) hypothesis block is B_i B_j with
// B_i = sqrt(prior_i * state_i). Equal to C C^† for the stacked block column
// C = [B_1; ...; B_m], hence automatically positive semidefinite; its trace
// is sum_i prior_i tr(state_i) = 1. Subsystem A indexes the hypothesis,
// subsystem B carries the original state space.
template <typename Real>
DensityMatrix<Real> qsd_state(const QsdEnsemble<Real>& ens, const Tolerances<Real>& tol = {}) {
  validate_ensemble(ens, tol);
  const Index m = ens.size(), n = ens.dim();
  std::vector<Matrix<Real>> b(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i)
    b[static_cast<std::size_t>(i)] =
        psd_sqrt(Matrix<Real>(ens.priors[i] * ens.states[static_cast<std::size_t>(i)]), tol);

  DensityMatrix<Real> rho;
  rho.dim_a = m;
  rho.dim_b = n;
  rho.mat = Matrix<Real>(m * n, m * n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j)
      rho.mat.block(i * n, j * n, n, n) =
          b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
  validate_density(rho.mat, m, n, tol);
  return rho;
}

// Ensemble carried by a bipartite state relative to the hypothesis-register
// projectors P_i = |i><i| (x) I: probabilities p_i = tr(P_i rho) and
// conditional states omega_i = sqrt(rho) P_i sqrt(rho) / p_i. They satisfy
// sum_i p_i omega_i = rho exactly.
template <typename Real>
QsdEnsemble<Real> qsd_ensemble(const DensityMatrix<Real>& rho, const Tolerances<Real>& tol = {}) {
  validate_density(rho.mat, rho.dim_a, rho.dim_b, tol);
  const Index m = rho.dim_a, n = rho.dim_b;
  const Matrix<Real> sq = psd_sqrt(rho.mat, tol);
  QsdEnsemble<Real> out;
  out.priors = RealVector<Real>(m);
  out.states.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    // P_i picks the i-th block column of sqrt(rho).
    const Matrix<Real> cols = sq.middleCols(i * n, n);
    Matrix<Real> unnorm = cols * cols.adjoint();
    const Real p = unnorm.trace().real();
    out.priors[i] = p;
    if (p < tol.p_floor)
      throw NumericError("qsd_ensemble: hypothesis " + std::to_string(i) +
                         " has vanishing probability");
    out.states.push_back(unnorm / p);
  }
  return out;
}

// Helstrom bound for two hypotheses: (1 + || n1 r1 - n2 r2 ||_1) / 2.
template <typename Real>
Real helstrom_success(const QsdEnsemble<Real>& ens, const Tolerances<Real>& tol = {}) {
  validate_ensemble(ens, tol);
  if (ens.size() != 2)
    throw ValidationError("helstrom_success: requires exactly two hypotheses");
  const Matrix<Real> delta = ens.priors[0] * ens.states[0] - ens.priors[1] * ens.states[1];
  return (Real(1) + trace_norm(delta)) / Real(2);
}

// Pretty-good measurement: M_i = S^{-1/2} prior_i state_i S^{-1/2} with
// S = sum_i prior_i state_i, inverted on its numerical support. Any rank
// deficiency of S is padded back uniformly so the elements sum to the
// identity; the padding is orthogonal to every hypothesis state and does not
// change any success probability.
template <typename Real>
std::vector<Matrix<Real>> pgm(const QsdEnsemble<Real>& ens, const Tolerances<Real>& tol = {}) {
  validate_ensemble(ens, tol);
  const Index m = ens.size(), n = ens.dim();
  Matrix<Real> s = Matrix<Real>::Zero(n, n);
  for (Index i = 0; i < m; ++i) s += ens.priors[i] * ens.states[static_cast<std::size_t>(i)];
  HermEig<Real> eig = herm_eig(s, tol);
  const Real cutoff = Real(1e-10) * std::max(eig.values[0], Real(0));
  Matrix<Real> inv_sqrt = Matrix<Real>::Zero(n, n);
  Matrix<Real> support = Matrix<Real>::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    if (eig.values[k] <= cutoff) continue;
    const Matrix<Real> proj = eig.vectors.col(k) * eig.vectors.col(k).adjoint();
    inv_sqrt += proj / std::sqrt(eig.values[k]);
    support += proj;
  }
  std::vector<Matrix<Real>> povm;
  povm.reserve(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i)
    povm.push_back(inv_sqrt * (ens.priors[i] * ens.states[static_cast<std::size_t>(i)]) *
                   inv_sqrt);
  const Matrix<Real> gap = Matrix<Real>::Identity(n, n) - support;
  if (gap.cwiseAbs().maxCoeff() > tol.psd)
    for (auto& el : povm) el += gap / Real(m);
  return povm;
}

template <typename Real>
Real povm_success(const QsdEnsemble<Real>& ens, const std::vector<Matrix<Real>>& povm) {
  if (static_cast<Index>(povm.size()) != ens.size())
    throw ValidationError("povm_success: outcome count does not match hypothesis count");
  Real s = 0;
  for (Index i = 0; i < ens.size(); ++i)
    s += ens.priors[i] *
         (povm[static_cast<std::size_t>(i)] * ens.states[static_cast<std::size_t>(i)])
             .trace()
             .real();
  return s;
}

template <typename Real>
Real pgm_success(const QsdEnsemble<Real>& ens, const Tolerances<Real>& tol = {}) {
  return povm_success(ens, pgm(ens, tol));
}

template <typename Real = double>
struct EquivalenceReport {
  Real success_original = 0;   // sum_i prior_i tr(M_i state_i)
  Real success_embedded = 0;   // sum_i p_i tr(N_i omega_i) in the bipartite picture
  Real max_deviation = 0;      // |success_embedded - success_original|
  Real prior_mismatch = 0;     // max_i |p_i - prior_i|
};

// Maps a discrimination strategy M on the original space to outcome
// operators N_i = pinv(sqrt(rho)) A^† M_i A pinv(sqrt(rho)) on the embedded
// state, where A = [B_1 ... B_m] is the block row with A^† A = rho. Then
// tr(N_i sqrt(rho) P_j sqrt(rho)) = prior_j tr(M_i state_j) identically, so
// the embedded success probability reproduces the original one; the report
// records the numerical deviation actually achieved.
template <typename Real>
EquivalenceReport<Real> discrimination_equivalence_check(const QsdEnsemble<Real>& ens,
                                                         const std::vector<Matrix<Real>>& povm,
                                                         const Tolerances<Real>& tol = {}) {
  validate_ensemble(ens, tol);
  if (static_cast<Index>(povm.size()) != ens.size())
    throw ValidationError("equivalence check: outcome count does not match hypothesis count");
  const Index m = ens.size(), n = ens.dim();

  DensityMatrix<Real> rho = qsd_state(ens, tol);
  QsdEnsemble<Real> extracted = qsd_ensemble(rho, tol);

  EquivalenceReport<Real> rep;
  for (Index i = 0; i < m; ++i)
    rep.prior_mismatch = std::max(rep.prior_mismatch,
                                  std::abs(extracted.priors[i] - ens.priors[i]));

  Matrix<Real> a(n, m * n);  // block row of the B_i
  for (Index i = 0; i < m; ++i)
    a.middleCols(i * n, n) =
        psd_sqrt(Matrix<Real>(ens.priors[i] * ens.states[static_cast<std::size_t>(i)]), tol);

  // Pseudo-inverse square root of rho on its numerical support.
  HermEig<Real> eig = herm_eig(rho.mat, tol);
  const Real cutoff = Real(1e-10) * std::max(eig.values[0], Real(0));
  Matrix<Real> pinv_sqrt = Matrix<Real>::Zero(m * n, m * n);
  for (Index k = 0; k < m * n; ++k)
    if (eig.values[k] > cutoff)
      pinv_sqrt += eig.vectors.col(k) * eig.vectors.col(k).adjoint() / std::sqrt(eig.values[k]);

  const Matrix<Real> sq = psd_sqrt(rho.mat, tol);
  for (Index i = 0; i < m; ++i) {
    const Matrix<Real> ni =
        pinv_sqrt * a.adjoint() * povm[static_cast<std::size_t>(i)] * a * pinv_sqrt;
    const Matrix<Real> weighted =
        sq.middleCols(i * n, n) * sq.middleCols(i * n, n).adjoint();  // sqrt(rho) P_i sqrt(rho)
    rep.success_embedded += (ni * weighted).trace().real();
    rep.success_original +=
        ens.priors[i] *
        (povm[static_cast<std::size_t>(i)] * ens.states[static_cast<std::size_t>(i)])
            .trace()
            .real();
  }
  rep.max_deviation = std::abs(rep.success_embedded - rep.success_original);
  return rep;
}

}  // namespace pcfi
