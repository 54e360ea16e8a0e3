#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "pcfi/linalg.hpp"
#include "pcfi/types.hpp"

// Phase-parametrized post-selective channels on subsystem A, the
// block-dephasing structure they preserve, and the rank-1 refinement.
//
// Each Kraus element is K_l(eps) = sum_n b_n e^{i g_n(eps)} |f(n)><n| with
// affine phases g_n(eps) = phase0_n + deriv_n * eps. Everything downstream
// (probabilities, Fisher information) depends only on the phase values and
// first derivatives at the evaluation point, so the affine form is fully
// general for those quantities.
namespace pcfi {

template <typename Real = double>
struct KrausElement {
  std::vector<Index> targets;  // f(n), 0-based column -> row map
  Vector<Real> coeffs;         // b_n, complex
  RealVector<Real> phase0;     // phase at eps = 0
  RealVector<Real> deriv;      // phase derivative, constant in eps
};

// A channel is valid when sum_l K_l(eps)^† K_l(eps) = I for every eps.
// deriv_bound is 1 for channels in the admissible class; derivative_rescale
// produces marked copies with a different bound that the estimation routines
// accept but the coherence measures must not be built from.
template <typename Real = double>
struct PioChannel {
  Index dim_a = 0;
  std::vector<KrausElement<Real>> elements;
  Real deriv_bound = Real(1);

  bool is_rescaled() const { return deriv_bound != Real(1); }
};

// An element is rank-1 exactly when all its targets coincide: then
// K_l = |f><beta_l| and K_l^†K_l has rank 1.
template <typename Real>
bool is_rank1(const KrausElement<Real>& el) {
  return std::adjacent_find(el.targets.begin(), el.targets.end(),
                            std::not_equal_to<>()) == el.targets.end();
}

template <typename Real>
bool is_rank1(const PioChannel<Real>& ch) {
  return std::all_of(ch.elements.begin(), ch.elements.end(),
                     [](const KrausElement<Real>& el) { return is_rank1(el); });
}

template <typename Real>
Matrix<Real> kraus_matrix(const KrausElement<Real>& el, Index dim_a, Real eps) {
  Matrix<Real> k = Matrix<Real>::Zero(dim_a, dim_a);
  for (Index n = 0; n < dim_a; ++n) {
    const Real g = el.phase0[n] + el.deriv[n] * eps;
    k(el.targets[static_cast<std::size_t>(n)], n) +=
        el.coeffs[n] * std::polar(Real(1), g);
  }
  return k;
}

// d/d(eps) of kraus_matrix at the same point.
template <typename Real>
Matrix<Real> kraus_matrix_deriv(const KrausElement<Real>& el, Index dim_a, Real eps) {
  Matrix<Real> k = Matrix<Real>::Zero(dim_a, dim_a);
  for (Index n = 0; n < dim_a; ++n) {
    const Real g = el.phase0[n] + el.deriv[n] * eps;
    k(el.targets[static_cast<std::size_t>(n)], n) +=
        el.coeffs[n] * Complex<Real>(0, el.deriv[n]) * std::polar(Real(1), g);
  }
  return k;
}

// Zeroes every <i|_A rho |j>_A block with i != j. The result is always a
// valid state (Hermitian, trace and positivity preserved).
template <typename Real>
Matrix<Real> luders_dephase(const Matrix<Real>& m, Index dim_a, Index dim_b) {
  Matrix<Real> out = m;
  for (Index i = 0; i < dim_a; ++i)
    for (Index j = 0; j < dim_a; ++j)
      if (i != j) out.block(i * dim_b, j * dim_b, dim_b, dim_b).setZero();
  return out;
}

template <typename Real>
DensityMatrix<Real> luders_dephase(const DensityMatrix<Real>& rho) {
  DensityMatrix<Real> out = rho;
  out.mat = luders_dephase(rho.mat, rho.dim_a, rho.dim_b);
  return out;
}

template <typename Real>
bool is_partial_incoherent(const DensityMatrix<Real>& rho, Real tol = Real(1e-10)) {
  return frobenius((rho.mat - luders_dephase(rho).mat).eval()) <= tol;
}

// Companion predicate on the reduced state. The Fisher-information measures
// factor through tr_B(rho), so they vanish on every state with diagonal
// reduced state -- a strictly larger set than the block-diagonal states
// (off-diagonal blocks with zero trace are invisible to them). Both
// predicates are exposed so callers can ask either question.
template <typename Real>
bool has_diagonal_reduced(const DensityMatrix<Real>& rho, Real tol = Real(1e-10)) {
  Matrix<Real> ra = partial_trace_b(rho);
  Matrix<Real> diag = ra.diagonal().asDiagonal();
  return (ra - diag).cwiseAbs().maxCoeff() <= tol;
}

struct ChannelReport {
  bool ok = true;
  std::string message;         // empty when ok
  double worst_residual = 0;   // largest completeness-group residual seen
};

// Completeness for all eps, checked structurally: expanding
// sum_l K_l(eps)^†K_l(eps) in the basis pair (n, m) gives a trigonometric
// polynomial in eps whose frequencies are the derivative differences
// delta = deriv_n - deriv_m. The identity holds for every eps iff each
// frequency's coefficient sum_l b_n^l conj(b_m^l) e^{i(phase0_n - phase0_m)}
// vanishes (and the diagonal delta = 0 sums equal 1). Static phases stay
// inside the coefficients: only the derivative difference is a frequency, so
// elements must cancel within a frequency group regardless of their phase0.
// A numerical spot-check at a few eps values backs the structural test.
template <typename Real>
ChannelReport validate_channel(const PioChannel<Real>& ch, Real tol = Real(1e-9)) {
  ChannelReport rep;
  std::ostringstream os;

  if (ch.dim_a < 1) {
    rep.ok = false;
    rep.message = "channel: dim_a must be positive";
    return rep;
  }
  const Index n_a = ch.dim_a;
  const Real bound = ch.deriv_bound;
  for (std::size_t l = 0; l < ch.elements.size(); ++l) {
    const KrausElement<Real>& el = ch.elements[l];
    if (static_cast<Index>(el.targets.size()) != n_a || el.coeffs.size() != n_a ||
        el.phase0.size() != n_a || el.deriv.size() != n_a) {
      os << "channel element " << l + 1 << ": field lengths must all equal dim_a";
      rep.ok = false;
      rep.message = os.str();
      return rep;
    }
    for (Index n = 0; n < n_a; ++n) {
      const Index t = el.targets[static_cast<std::size_t>(n)];
      if (t < 0 || t >= n_a) {
        os << "channel element " << l + 1 << ": target out of range at column " << n + 1;
        rep.ok = false;
        rep.message = os.str();
        return rep;
      }
      if (el.deriv[n] < -Real(1e-12) || el.deriv[n] > bound + Real(1e-12)) {
        os << "channel element " << l + 1 << ": deriv[" << n + 1 << "]=" << el.deriv[n]
           << " outside [0, " << bound << "]";
        rep.ok = false;
        rep.message = os.str();
        return rep;
      }
    }
  }

  // Structural check: group (n, m) contributions by derivative difference.
  Real worst = 0;
  Index worst_n = 0, worst_m = 0;
  for (Index n = 0; n < n_a; ++n) {
    for (Index m = 0; m < n_a; ++m) {
      std::vector<std::pair<Real, Complex<Real>>> terms;  // (delta, contribution)
      for (const KrausElement<Real>& el : ch.elements) {
        if (el.targets[static_cast<std::size_t>(n)] != el.targets[static_cast<std::size_t>(m)])
          continue;
        const Real delta = el.deriv[n] - el.deriv[m];
        const Complex<Real> c = el.coeffs[n] * std::conj(el.coeffs[m]) *
                                std::polar(Real(1), el.phase0[n] - el.phase0[m]);
        terms.emplace_back(delta, c);
      }
      std::sort(terms.begin(), terms.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t i = 0;
      while (i < terms.size()) {
        std::size_t j = i;
        Complex<Real> sum = 0;
        while (j < terms.size() && terms[j].first - terms[i].first <= Real(1e-9)) {
          sum += terms[j].second;
          ++j;
        }
        const bool zero_freq = std::abs(terms[i].first) <= Real(1e-9);
        const Complex<Real> expected = (n == m && zero_freq) ? Complex<Real>(1) : Complex<Real>(0);
        const Real res = std::abs(sum - expected);
        if (res > worst) {
          worst = res;
          worst_n = n;
          worst_m = m;
        }
        i = j;
      }
      if (n == m && terms.empty()) {
        // No element touches basis index n at all: sum is 0, must be 1.
        worst = std::max(worst, Real(1));
        worst_n = worst_m = n;
      }
    }
  }
  rep.worst_residual = static_cast<double>(worst);
  if (worst > tol) {
    os << "channel completeness violated: worst residual " << worst << " at basis pair ("
       << worst_n + 1 << ", " << worst_m + 1 << ")";
    rep.ok = false;
    rep.message = os.str();
    return rep;
  }

  // Numerical spot-check at a few parameter values.
  for (Real eps : {Real(0), Real(0.37), Real(-0.37), Real(1.91)}) {
    Matrix<Real> acc = Matrix<Real>::Zero(n_a, n_a);
    for (const KrausElement<Real>& el : ch.elements) {
      Matrix<Real> k = kraus_matrix(el, n_a, eps);
      acc += k.adjoint() * k;
    }
    const Real res = (acc - Matrix<Real>::Identity(n_a, n_a)).cwiseAbs().maxCoeff();
    rep.worst_residual = std::max(rep.worst_residual, static_cast<double>(res));
    if (res > Real(10) * tol) {
      os << "channel completeness violated numerically at eps=" << eps << " (residual "
         << res << ")";
      rep.ok = false;
      rep.message = os.str();
      return rep;
    }
  }
  return rep;
}

template <typename Real>
void require_valid_channel(const PioChannel<Real>& ch, Real tol = Real(1e-9)) {
  ChannelReport rep = validate_channel(ch, tol);
  if (!rep.ok) throw ValidationError(rep.message);
}

template <typename Real>
struct ApplyResult {
  std::vector<std::optional<DensityMatrix<Real>>> post_states;  // null below p_floor
  RealVector<Real> probs;
};

// Applies K_l(eps) (x) I_B to the full state: probs[l] = tr(Phi_l rho Phi_l^†)
// and post_states[l] the normalized outcome, or null when the outcome
// probability sits below p_floor.
template <typename Real>
ApplyResult<Real> apply_channel(const PioChannel<Real>& ch, const DensityMatrix<Real>& rho,
                                Real eps, const Tolerances<Real>& tol = {}) {
  if (ch.dim_a != rho.dim_a)
    throw ValidationError("apply_channel: channel and state disagree on dim_a");
  const Index n_out = static_cast<Index>(ch.elements.size());
  ApplyResult<Real> out;
  out.probs.resize(n_out);
  out.post_states.resize(static_cast<std::size_t>(n_out));
  const Matrix<Real> id_b = Matrix<Real>::Identity(rho.dim_b, rho.dim_b);
  for (Index l = 0; l < n_out; ++l) {
    Matrix<Real> full = tensor(kraus_matrix(ch.elements[static_cast<std::size_t>(l)],
                                            ch.dim_a, eps),
                               id_b);
    Matrix<Real> sigma = full * rho.mat * full.adjoint();
    const Real p = sigma.trace().real();
    out.probs[l] = p;
    if (p >= tol.p_floor) {
      out.post_states[static_cast<std::size_t>(l)] =
          DensityMatrix<Real>{rho.dim_a, rho.dim_b, sigma / p};
    }
  }
  const Real total = out.probs.sum();
  if (std::abs(total - Real(1)) > Real(100) * tol.trace) {
    std::ostringstream os;
    os << "apply_channel: outcome probabilities sum to " << total;
    throw NumericError(os.str());
  }
  return out;
}

// Splits each element as K_l(eps) = V_l U_l(eps) with V_l the static
// coefficient part and U_l(eps) the diagonal phase part, eigendecomposes
// V_l^†V_l = sum_i |chi_i><chi_i| (eigenvalue absorbed into the vector), and
// emits the rank-1 pieces |i><chi_i| U_l(eps). Outcome probabilities refine,
// so every post-processing of the original outcomes can be reproduced and
// the Fisher information never decreases.
template <typename Real>
PioChannel<Real> refine_to_rank1(const PioChannel<Real>& ch, const Tolerances<Real>& tol = {}) {
  PioChannel<Real> out;
  out.dim_a = ch.dim_a;
  out.deriv_bound = ch.deriv_bound;
  const Index n_a = ch.dim_a;
  for (const KrausElement<Real>& el : ch.elements) {
    Matrix<Real> v = Matrix<Real>::Zero(n_a, n_a);
    for (Index n = 0; n < n_a; ++n)
      v(el.targets[static_cast<std::size_t>(n)], n) += el.coeffs[n];
    HermEig<Real> eig = herm_eig((v.adjoint() * v).eval(), tol);
    for (Index i = 0; i < n_a; ++i) {
      if (eig.values[i] <= Real(1e-14)) continue;
      Vector<Real> chi = std::sqrt(eig.values[i]) * eig.vectors.col(i);
      KrausElement<Real> re;
      re.targets.assign(static_cast<std::size_t>(n_a), i);
      re.coeffs = chi.conjugate();
      re.phase0 = el.phase0;
      re.deriv = el.deriv;
      out.elements.push_back(std::move(re));
    }
  }
  return out;
}

// Two-outcome interferometric probe of the (i, j) coherence, padded with an
// identity element on the remaining basis states:
//   K_1 = (sqrt2/2) e^{i(eps+gamma)} |i><i| + (sqrt2/2) |i><j|
//   K_2 = -(sqrt2/2) e^{i(eps+gamma)} |j><i| + (sqrt2/2) |j><j|
//   K_3 = sum_{n not in {i,j}} |n><n|   (absent when n_a = 2)
// Indices are 1-based to match the file format. Outcome probabilities are
// 1/2 [rho_ii + rho_jj +- 2|rho_ij| cos(arg rho_ij + eps + gamma)], so any
// nonzero rho_ij makes the distribution eps-sensitive for suitable gamma.
template <typename Real>
PioChannel<Real> witness_channel(Index n_a, Index i, Index j, Real gamma) {
  if (!(1 <= i && i < j && j <= n_a))
    throw ValidationError("witness_channel: need 1 <= i < j <= n_a");
  const Index i0 = i - 1, j0 = j - 1;
  const Real h = std::sqrt(Real(2)) / Real(2);
  PioChannel<Real> ch;
  ch.dim_a = n_a;

  KrausElement<Real> k1;
  k1.targets.assign(static_cast<std::size_t>(n_a), i0);
  k1.coeffs = Vector<Real>::Zero(n_a);
  k1.phase0 = RealVector<Real>::Zero(n_a);
  k1.deriv = RealVector<Real>::Zero(n_a);
  k1.coeffs[i0] = h;
  k1.coeffs[j0] = h;
  k1.phase0[i0] = gamma;
  k1.deriv[i0] = Real(1);

  KrausElement<Real> k2 = k1;
  k2.targets.assign(static_cast<std::size_t>(n_a), j0);
  k2.coeffs[i0] = -h;

  ch.elements.push_back(std::move(k1));
  ch.elements.push_back(std::move(k2));

  if (n_a > 2) {
    KrausElement<Real> k3;
    k3.targets.resize(static_cast<std::size_t>(n_a));
    for (Index n = 0; n < n_a; ++n) k3.targets[static_cast<std::size_t>(n)] = n;
    k3.coeffs = Vector<Real>::Zero(n_a);
    k3.phase0 = RealVector<Real>::Zero(n_a);
    k3.deriv = RealVector<Real>::Zero(n_a);
    for (Index n = 0; n < n_a; ++n)
      if (n != i0 && n != j0) k3.coeffs[n] = Real(1);
    ch.elements.push_back(std::move(k3));
  }
  return ch;
}

// Multiplies every phase derivative by k > 0 and widens the recorded bound
// accordingly. The result is marked (deriv_bound != 1): fine for Fisher
// information and estimation, not admissible as a coherence certificate.
template <typename Real>
PioChannel<Real> derivative_rescale(const PioChannel<Real>& ch, Real k) {
  if (!(k > Real(0))) throw ValidationError("derivative_rescale: k must be positive");
  PioChannel<Real> out = ch;
  out.deriv_bound = ch.deriv_bound * k;
  for (KrausElement<Real>& el : out.elements) el.deriv *= k;
  return out;
}

}  // namespace pcfi
