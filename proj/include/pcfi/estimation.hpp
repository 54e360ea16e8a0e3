#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "pcfi/channel.hpp"
#include "pcfi/linalg.hpp"
#include "pcfi/types.hpp"

// Fisher information of channel outcome distributions, quantum Fisher
// information of the induced reduced-state families, the closed form under
// diagonal unitary parametrization, and a Monte-Carlo maximum-likelihood
// check against the Cramer-Rao bound.
namespace pcfi {

template <typename Real = double>
struct OutcomeDistribution {
  RealVector<Real> probs;   // P(l | eps0)
  RealVector<Real> dprobs;  // d/d(eps) P(l | eps) at eps0
};

template <typename Real>
void validate_distribution(const OutcomeDistribution<Real>& dist,
                           const Tolerances<Real>& tol = {}) {
  if (dist.probs.size() != dist.dprobs.size())
    throw ValidationError("distribution: probs and dprobs lengths differ");
  if (dist.probs.size() > 0 && dist.probs.minCoeff() < -Real(1e-12))
    throw ValidationError("distribution: negative probability");
  std::ostringstream os;
  const Real psum = dist.probs.sum();
  if (std::abs(psum - Real(1)) > tol.trace) {
    os << "distribution: probabilities sum to " << psum;
    throw ValidationError(os.str());
  }
  const Real dsum = std::abs(dist.dprobs.sum());
  if (dsum > Real(1e-9)) {
    os << "distribution: derivative sum " << dsum << " should vanish";
    throw ValidationError(os.str());
  }
}

// Every probability factors through the reduced state: tr(Phi_l rho Phi_l^†)
// = tr(K_l tr_B(rho) K_l^†). This overload takes the reduced state directly.
template <typename Real>
OutcomeDistribution<Real> outcome_distribution_reduced(const PioChannel<Real>& ch,
                                                       const Matrix<Real>& rho_a, Real eps0,
                                                       const Tolerances<Real>& tol = {}) {
  const Index n_out = static_cast<Index>(ch.elements.size());
  OutcomeDistribution<Real> dist;
  dist.probs.resize(n_out);
  dist.dprobs.resize(n_out);
  for (Index l = 0; l < n_out; ++l) {
    const KrausElement<Real>& el = ch.elements[static_cast<std::size_t>(l)];
    Matrix<Real> k = kraus_matrix(el, ch.dim_a, eps0);
    Matrix<Real> kd = kraus_matrix_deriv(el, ch.dim_a, eps0);
    const Complex<Real> p = (k * rho_a * k.adjoint()).trace();
    const Complex<Real> dp = (kd * rho_a * k.adjoint()).trace() +
                             (k * rho_a * kd.adjoint()).trace();
    if (std::abs(p.imag()) > Real(1e-10) || std::abs(dp.imag()) > Real(1e-10)) {
      std::ostringstream os;
      os << "outcome_distribution: non-real probability (imag " << p.imag() << " / "
         << dp.imag() << ") at outcome " << l + 1;
      throw NumericError(os.str());
    }
    dist.probs[l] = p.real();
    dist.dprobs[l] = dp.real();
  }
  validate_distribution(dist, tol);
  return dist;
}

template <typename Real>
OutcomeDistribution<Real> outcome_distribution(const PioChannel<Real>& ch,
                                               const DensityMatrix<Real>& rho, Real eps0,
                                               const Tolerances<Real>& tol = {}) {
  if (ch.dim_a != rho.dim_a)
    throw ValidationError("outcome_distribution: channel and state disagree on dim_a");
  return outcome_distribution_reduced(ch, partial_trace_b(rho), eps0, tol);
}

// F = sum_l dP_l^2 / P_l over outcomes with P_l >= p_floor.
template <typename Real>
Real classical_fi(const OutcomeDistribution<Real>& dist, Real p_floor = Real(1e-12)) {
  Real f = 0;
  for (Index l = 0; l < dist.probs.size(); ++l)
    if (dist.probs[l] >= p_floor) f += dist.dprobs[l] * dist.dprobs[l] / dist.probs[l];
  return f;
}

template <typename Real>
using Povm = std::vector<Matrix<Real>>;

template <typename Real>
void validate_povm(const Povm<Real>& m, Index dim, const Tolerances<Real>& tol = {}) {
  if (m.empty()) throw ValidationError("povm: no elements");
  Matrix<Real> sum = Matrix<Real>::Zero(dim, dim);
  for (std::size_t l = 0; l < m.size(); ++l) {
    if (m[l].rows() != dim || m[l].cols() != dim)
      throw ValidationError("povm: element size mismatch");
    const Real hres = herm_residual(m[l]);
    if (hres > tol.herm) {
      std::ostringstream os;
      os << "povm: element " << l + 1 << " not Hermitian (residual " << hres << ")";
      throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(
        ((m[l] + m[l].adjoint()) / Real(2)).eval(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol.psd) {
      std::ostringstream os;
      os << "povm: element " << l + 1 << " not PSD (eigenvalue "
         << es.eigenvalues().minCoeff() << ")";
      throw ValidationError(os.str());
    }
    sum += m[l];
  }
  const Real res = (sum - Matrix<Real>::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (res > Real(100) * tol.trace) {
    std::ostringstream os;
    os << "povm: elements sum to identity only within " << res;
    throw ValidationError(os.str());
  }
}

// Reduced-state family after the channel (no post-selection):
// rho_a(eps) = sum_l K_l(eps) rho_a K_l(eps)^†, with its analytic derivative.
template <typename Real>
void evolve_reduced(const PioChannel<Real>& ch, const Matrix<Real>& rho_a, Real eps0,
                    Matrix<Real>& out, Matrix<Real>& dout) {
  out = Matrix<Real>::Zero(ch.dim_a, ch.dim_a);
  dout = Matrix<Real>::Zero(ch.dim_a, ch.dim_a);
  for (const KrausElement<Real>& el : ch.elements) {
    Matrix<Real> k = kraus_matrix(el, ch.dim_a, eps0);
    Matrix<Real> kd = kraus_matrix_deriv(el, ch.dim_a, eps0);
    out += k * rho_a * k.adjoint();
    dout += kd * rho_a * k.adjoint() + k * rho_a * kd.adjoint();
  }
}

// Classical FI of measuring {M_l (x) I_B} on the channel output, which only
// sees the evolved reduced state.
template <typename Real>
Real fi_of_povm(const Povm<Real>& m, const PioChannel<Real>& ch, const DensityMatrix<Real>& rho,
                Real eps0, const Tolerances<Real>& tol = {}) {
  if (ch.dim_a != rho.dim_a)
    throw ValidationError("fi_of_povm: channel and state disagree on dim_a");
  validate_povm(m, ch.dim_a, tol);
  Matrix<Real> evolved, devolved;
  evolve_reduced(ch, partial_trace_b(rho), eps0, evolved, devolved);
  Real f = 0;
  for (const Matrix<Real>& ml : m) {
    const Real p = (ml * evolved).trace().real();
    const Real dp = (ml * devolved).trace().real();
    if (p >= tol.p_floor) f += dp * dp / p;
  }
  return f;
}

// SLD quantum Fisher information of a family from its state and derivative:
// F_Q = 2 sum_{i,j: p_i+p_j >= p_floor} |<phi_i|drho|phi_j>|^2 / (p_i + p_j).
template <typename Real>
Real qfi_from_derivative(const Matrix<Real>& rho, const Matrix<Real>& drho,
                         const Tolerances<Real>& tol = {}) {
  HermEig<Real> eig = herm_eig(rho, tol);
  Matrix<Real> d = eig.vectors.adjoint() * drho * eig.vectors;
  Real q = 0;
  for (Index i = 0; i < eig.values.size(); ++i)
    for (Index j = 0; j < eig.values.size(); ++j) {
      const Real denom = eig.values[i] + eig.values[j];
      if (denom >= tol.p_floor) q += Real(2) * std::norm(d(i, j)) / denom;
    }
  return q;
}

// Max-over-POVM Fisher information of the post-channel family. Measurements
// are restricted to subsystem A (the {M_l (x) I_B} form), so this is the QFI
// of the evolved reduced family; for entangled inputs it can sit strictly
// below the QFI of the global family.
template <typename Real>
Real qfi_family(const PioChannel<Real>& ch, const DensityMatrix<Real>& rho, Real eps0,
                const Tolerances<Real>& tol = {}) {
  if (ch.dim_a != rho.dim_a)
    throw ValidationError("qfi_family: channel and state disagree on dim_a");
  Matrix<Real> evolved, devolved;
  evolve_reduced(ch, partial_trace_b(rho), eps0, evolved, devolved);
  return qfi_from_derivative(evolved, devolved, tol);
}

// QFI of the diagonal-generator unitary family e^{iH eps} rho e^{-iH eps}
// with H = diag(h). Equals 2 sum (p_i - p_j)^2 / (p_i + p_j) |H_ij|^2; for a
// pure state this reduces to 4 (<H^2> - <H>^2).
template <typename Real>
Real qfi_unitary(const Matrix<Real>& rho_a, const RealVector<Real>& h,
                 const Tolerances<Real>& tol = {}) {
  if (rho_a.rows() != rho_a.cols() || rho_a.rows() != h.size())
    throw ValidationError("qfi_unitary: generator length must match matrix size");
  HermEig<Real> eig = herm_eig(rho_a, tol);
  const Index n = h.size();
  Real q = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Real denom = eig.values[i] + eig.values[j];
      if (denom < tol.p_floor) continue;
      Complex<Real> hij = 0;
      for (Index k = 0; k < n; ++k)
        hij += std::conj(eig.vectors(k, i)) * h[k] * eig.vectors(k, j);
      const Real num = eig.values[i] - eig.values[j];
      q += Real(2) * num * num / denom * std::norm(hij);
    }
  return q;
}

template <typename Real = double>
struct MleResult {
  Real variance = 0;  // empirical estimator variance across trials
  Real crb = 0;       // 1 / (n_shots * F)
  Real fi = 0;        // classical FI at eps_true
  Real mean = 0;      // mean of the estimates
};

namespace detail {

// mt19937_64 with an explicit 53-bit uniform so sampled data is bit-stable
// across standard libraries (std::uniform_real_distribution is not).
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

// Golden-section maximum of a unimodal function on [lo, hi].
template <typename Real, typename F>
Real golden_max(F&& f, Real lo, Real hi, Real tol_x) {
  const Real phi = (std::sqrt(Real(5)) - Real(1)) / Real(2);
  Real a = lo, b = hi;
  Real x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  Real f1 = f(x1), f2 = f(x2);
  while (b - a > tol_x) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return (a + b) / Real(2);
}

}  // namespace detail

// Draws n_shots outcomes per trial from P(. | eps_true), maximizes the
// log-likelihood over a 256-point grid on [eps_true - pi, eps_true + pi]
// refined by golden section to 1e-6, and reports the estimator variance next
// to the Cramer-Rao bound. The likelihood of a phase-probe channel can have
// a mirrored maximum at exactly the same height; ties within 1e-7 relative
// log-likelihood resolve to the candidate nearest the bracket center, the
// standard local-estimation convention. Deterministic given seed: trial t
// uses its own engine seeded with seed + t.
template <typename Real>
MleResult<Real> mle_simulation(const PioChannel<Real>& ch, const DensityMatrix<Real>& rho,
                               Real eps_true, int n_shots, int n_trials, std::uint64_t seed,
                               const Tolerances<Real>& tol = {}) {
  if (n_shots < 1 || n_trials < 2)
    throw ValidationError("mle_simulation: need n_shots >= 1 and n_trials >= 2");
  const Matrix<Real> rho_a = partial_trace_b(rho);
  OutcomeDistribution<Real> at_true = outcome_distribution_reduced(ch, rho_a, eps_true, tol);
  const Real fi = classical_fi(at_true, tol.p_floor);
  // Insensitive inputs produce FI at the rounding-noise scale (~1e-30) rather
  // than an exact zero; anything below this floor means the likelihood is
  // flat and the "estimate" would be sampling noise, so refuse instead.
  if (fi <= Real(1e-14))
    throw NumericError("mle_simulation: Fisher information is zero, no estimation possible");

  const Index n_out = at_true.probs.size();
  std::vector<Real> cdf(static_cast<std::size_t>(n_out));
  Real acc = 0;
  for (Index l = 0; l < n_out; ++l) {
    acc += std::max(at_true.probs[l], Real(0));
    cdf[static_cast<std::size_t>(l)] = acc;
  }

  constexpr int kGrid = 256;
  const Real lo = eps_true - Real(kPi), hi = eps_true + Real(kPi);
  std::vector<RealVector<Real>> grid_probs(kGrid);
  std::vector<Real> grid_eps(kGrid);
  for (int g = 0; g < kGrid; ++g) {
    const Real e = lo + (hi - lo) * Real(g) / Real(kGrid - 1);
    grid_eps[static_cast<std::size_t>(g)] = e;
    grid_probs[static_cast<std::size_t>(g)] =
        outcome_distribution_reduced(ch, rho_a, e, tol).probs;
  }

  const auto log_likelihood = [&](const std::vector<int>& counts,
                                  const RealVector<Real>& probs) {
    Real ll = 0;
    for (Index l = 0; l < n_out; ++l) {
      const int c = counts[static_cast<std::size_t>(l)];
      if (c > 0) ll += Real(c) * std::log(std::max(probs[l], Real(1e-300)));
    }
    return ll;
  };

  std::vector<Real> estimates(static_cast<std::size_t>(n_trials));
  for (int t = 0; t < n_trials; ++t) {
    detail::SampleRng rng(seed + static_cast<std::uint64_t>(t));
    std::vector<int> counts(static_cast<std::size_t>(n_out), 0);
    for (int s = 0; s < n_shots; ++s) {
      const Real u = static_cast<Real>(rng.uniform()) * acc;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t l = std::min(static_cast<std::size_t>(it - cdf.begin()),
                                     static_cast<std::size_t>(n_out - 1));
      ++counts[l];
    }

    std::vector<Real> ll(kGrid);
    Real best_ll = -std::numeric_limits<Real>::infinity();
    for (int g = 0; g < kGrid; ++g) {
      ll[static_cast<std::size_t>(g)] =
          log_likelihood(counts, grid_probs[static_cast<std::size_t>(g)]);
      best_ll = std::max(best_ll, ll[static_cast<std::size_t>(g)]);
    }

    // A grid sample can undershoot its peak by about n_shots * F * h^2 / 2
    // (curvature times half-spacing squared), so candidate peaks are kept
    // within that allowance of the grid maximum and compared only after
    // refinement; otherwise a mirrored maximum whose nearest grid point
    // happens to land closer to its crest would shadow the true one.
    const Real h = (hi - lo) / Real(kGrid - 1);
    const Real allowance =
        Real(2) * fi * Real(n_shots) * h * h + Real(1e-7) * std::max(Real(1), std::abs(best_ll));
    const auto refine_ll = [&](Real e) {
      return log_likelihood(counts, outcome_distribution_reduced(ch, rho_a, e, tol).probs);
    };
    std::vector<std::pair<Real, Real>> peaks;  // (refined eps, refined ll)
    for (int g = 0; g < kGrid; ++g) {
      const bool local_max =
          (g == 0 || ll[static_cast<std::size_t>(g)] >= ll[static_cast<std::size_t>(g - 1)]) &&
          (g == kGrid - 1 ||
           ll[static_cast<std::size_t>(g)] >= ll[static_cast<std::size_t>(g + 1)]);
      if (!local_max || ll[static_cast<std::size_t>(g)] < best_ll - allowance) continue;
      const Real a = grid_eps[static_cast<std::size_t>(std::max(0, g - 1))];
      const Real b = grid_eps[static_cast<std::size_t>(std::min(kGrid - 1, g + 1))];
      const Real e = detail::golden_max(refine_ll, a, b, Real(1e-6));
      peaks.emplace_back(e, refine_ll(e));
    }

    Real top = -std::numeric_limits<Real>::infinity();
    for (const auto& [e, value] : peaks) top = std::max(top, value);
    // Exactly mirrored maxima refine to equal heights; resolve the tie to
    // the candidate nearest the bracket center, the local-estimation
    // convention.
    const Real tie = Real(1e-7) * std::max(Real(1), std::abs(top));
    Real pick_eps = eps_true, pick_dist = std::numeric_limits<Real>::infinity();
    for (const auto& [e, value] : peaks) {
      if (value < top - tie) continue;
      const Real dist = std::abs(e - eps_true);
      if (dist < pick_dist) {
        pick_dist = dist;
        pick_eps = e;
      }
    }
    estimates[static_cast<std::size_t>(t)] = pick_eps;
  }

  MleResult<Real> res;
  res.fi = fi;
  res.crb = Real(1) / (Real(n_shots) * fi);
  Real mean = 0;
  for (Real e : estimates) mean += e;
  mean /= Real(n_trials);
  Real var = 0;
  for (Real e : estimates) var += (e - mean) * (e - mean);
  res.variance = var / Real(n_trials - 1);
  res.mean = mean;
  return res;
}

}  // namespace pcfi
