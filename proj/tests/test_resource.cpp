// Phase-parametrized post-selective channels: Kraus assembly, validation,
// the witness probe, rank-1 refinement, and block-dephasing predicates.
#include <catch2/catch_amalgamated.hpp>

#include "pcfi/channel.hpp"
#include "pcfi/estimation.hpp"
#include "pcfi/examples.hpp"
#include "pcfi/sampling.hpp"

using namespace pcfi;
using namespace pcfi::examples;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

KrausElement<double> element(std::vector<Index> targets, std::vector<Complex<double>> coeffs,
                             std::vector<double> phase0, std::vector<double> deriv) {
  KrausElement<double> el;
  el.targets = std::move(targets);
  const Index n = static_cast<Index>(coeffs.size());
  el.coeffs.resize(n);
  el.phase0.resize(n);
  el.deriv.resize(n);
  for (Index i = 0; i < n; ++i) {
    el.coeffs[i] = coeffs[i];
    el.phase0[i] = phase0[static_cast<std::size_t>(i)];
    el.deriv[i] = deriv[static_cast<std::size_t>(i)];
  }
  return el;
}

}  // namespace

TEST_CASE("kraus_matrix places coefficients with affine phases", "[channel]") {
  KrausElement<double> el =
      element({1, 0}, {0.6, Complex<double>(0, 0.8)}, {0.3, 0.0}, {1.0, 0.5});
  const double eps = 0.2;
  Matrix<double> k = kraus_matrix(el, 2, eps);
  REQUIRE(std::abs(k(1, 0) - 0.6 * std::polar(1.0, 0.3 + 1.0 * eps)) < 1e-15);
  REQUIRE(std::abs(k(0, 1) - Complex<double>(0, 0.8) * std::polar(1.0, 0.5 * eps)) < 1e-15);
  REQUIRE(std::abs(k(0, 0)) == 0.0);
  REQUIRE(std::abs(k(1, 1)) == 0.0);

  Matrix<double> kd = kraus_matrix_deriv(el, 2, eps);
  REQUIRE(std::abs(kd(1, 0) - Complex<double>(0, 1.0) * k(1, 0)) < 1e-15);
  REQUIRE(std::abs(kd(0, 1) - Complex<double>(0, 0.5) * k(0, 1)) < 1e-15);
}

TEST_CASE("bundled reference channel is complete and rank-1", "[channel]") {
  PioChannel<double> ch = reference_channel();
  REQUIRE(ch.dim_a == 3);
  REQUIRE(ch.elements.size() == 9);
  REQUIRE_NOTHROW(require_valid_channel(ch));
  REQUIRE(is_rank1(ch));
  REQUIRE_FALSE(ch.is_rescaled());
}

TEST_CASE("completeness groups by derivative difference, not by static phase", "[channel]") {
  // Two +/- interferometer halves per target. Within the frequency
  // delta = -1 the four cross terms cancel only because the static phases
  // pi sit inside the coefficient sum; splitting groups by static phase
  // would leave four nonzero singletons and wrongly reject the channel.
  PioChannel<double> ch;
  ch.dim_a = 2;
  ch.elements.push_back(element({0, 0}, {0.5, 0.5}, {0.0, 0.0}, {0.0, 1.0}));
  ch.elements.push_back(element({0, 0}, {0.5, 0.5}, {0.0, kPi}, {0.0, 1.0}));
  ch.elements.push_back(element({1, 1}, {0.5, 0.5}, {0.0, 0.0}, {0.0, 1.0}));
  ch.elements.push_back(element({1, 1}, {0.5, 0.5}, {0.0, kPi}, {0.0, 1.0}));
  REQUIRE_NOTHROW(require_valid_channel(ch));
  ChannelReport rep = validate_channel(ch);
  REQUIRE(rep.ok);
  REQUIRE(rep.worst_residual < 1e-12);
}

TEST_CASE("validate_channel pinpoints structural defects", "[channel]") {
  PioChannel<double> broken = reference_channel();
  broken.elements[0].coeffs *= 1.1;
  ChannelReport rep = validate_channel(broken);
  REQUIRE_FALSE(rep.ok);
  REQUIRE_THAT(rep.message, ContainsSubstring("completeness"));
  REQUIRE_THROWS_WITH(require_valid_channel(broken), ContainsSubstring("completeness"));

  PioChannel<double> bad_target = reference_channel();
  bad_target.elements[2].targets[0] = 7;
  REQUIRE_THAT(validate_channel(bad_target).message, ContainsSubstring("target out of range"));

  PioChannel<double> bad_deriv = reference_channel();
  bad_deriv.elements[0].deriv[1] = 1.5;
  REQUIRE_THAT(validate_channel(bad_deriv).message, ContainsSubstring("outside"));

  PioChannel<double> short_el = reference_channel();
  short_el.elements[0].targets.pop_back();
  REQUIRE_THAT(validate_channel(short_el).message, ContainsSubstring("field lengths"));

  PioChannel<double> empty;
  REQUIRE_FALSE(validate_channel(empty).ok);
}

TEST_CASE("channel missing a basis index fails completeness", "[channel]") {
  // Single element acting as the identity on index 0 only.
  PioChannel<double> ch;
  ch.dim_a = 2;
  ch.elements.push_back(element({0, 1}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}));
  ChannelReport rep = validate_channel(ch);
  REQUIRE_FALSE(rep.ok);
  REQUIRE_THAT(rep.message, ContainsSubstring("completeness"));
}

TEST_CASE("witness channel structure and outcome probabilities", "[channel]") {
  const double gamma = 0.4;
  PioChannel<double> ch = witness_channel<double>(3, 1, 2, gamma);
  REQUIRE(ch.elements.size() == 3);  // probe pair plus identity padding
  REQUIRE_NOTHROW(require_valid_channel(ch));
  REQUIRE(witness_channel<double>(2, 1, 2, gamma).elements.size() == 2);

  Rng rng(17);
  DensityMatrix<double> rho = random_bipartite<double>(rng, 3, 2);
  Matrix<double> ra = partial_trace_b(rho);
  const double eps = 0.7;
  OutcomeDistribution<double> dist = outcome_distribution(ch, rho, eps);

  const double mag = std::abs(ra(0, 1));
  const double arg = std::arg(ra(0, 1));
  const double base = 0.5 * (ra(0, 0).real() + ra(1, 1).real());
  const double osc = mag * std::cos(arg + eps + gamma);
  REQUIRE_THAT(dist.probs[0], WithinAbs(base + osc, 1e-13));
  REQUIRE_THAT(dist.probs[1], WithinAbs(base - osc, 1e-13));
  REQUIRE_THAT(dist.probs[2], WithinAbs(ra(2, 2).real(), 1e-13));
  const double dosc = -mag * std::sin(arg + eps + gamma);
  REQUIRE_THAT(dist.dprobs[0], WithinAbs(dosc, 1e-13));
  REQUIRE_THAT(dist.dprobs[1], WithinAbs(-dosc, 1e-13));
  REQUIRE_THAT(dist.dprobs[2], WithinAbs(0.0, 1e-13));

  REQUIRE_THROWS_AS(witness_channel<double>(3, 2, 2, 0.0), ValidationError);
  REQUIRE_THROWS_AS(witness_channel<double>(3, 0, 1, 0.0), ValidationError);
  REQUIRE_THROWS_AS(witness_channel<double>(3, 1, 4, 0.0), ValidationError);
}

TEST_CASE("derivative_rescale marks the channel and scales FI by k^2", "[channel]") {
  PioChannel<double> ch = witness_channel<double>(3, 1, 3, 0.9);
  Rng rng(23);
  DensityMatrix<double> rho = random_bipartite<double>(rng, 3, 2);
  const double base = classical_fi(outcome_distribution(ch, rho, 0.25));

  for (double k : {1.0 / 3.0, 2.0 / 3.0, 2.0}) {
    PioChannel<double> scaled = derivative_rescale(ch, k);
    REQUIRE(scaled.is_rescaled());
    REQUIRE_NOTHROW(require_valid_channel(scaled));  // bound widens with k
    // Same physical working point: the scaled derivatives reach the original
    // phases at eps0 / k, where the outcome slopes pick up exactly a factor k.
    const double fi = classical_fi(outcome_distribution(scaled, rho, 0.25 / k));
    REQUIRE_THAT(fi, WithinAbs(k * k * base, 1e-12 * std::max(1.0, base)));
  }
  REQUIRE_THROWS_AS(derivative_rescale(ch, 0.0), ValidationError);
  REQUIRE_THROWS_AS(derivative_rescale(ch, -1.0), ValidationError);
}

TEST_CASE("rank-1 refinement keeps completeness and never loses FI", "[channel]") {
  Rng rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    const Index na = 2 + static_cast<Index>(rng.below(3));
    PioChannel<double> ch = random_g_channel<double>(rng, na, 2, 1);
    PioChannel<double> fine = refine_to_rank1(ch);
    REQUIRE_NOTHROW(require_valid_channel(fine));
    REQUIRE(is_rank1(fine));

    DensityMatrix<double> rho = random_bipartite<double>(rng, na, 2);
    const double eps = 0.3;
    const double f0 = classical_fi(outcome_distribution(ch, rho, eps));
    const double f1 = classical_fi(outcome_distribution(fine, rho, eps));
    REQUIRE(f1 >= f0 - 1e-9);
    REQUIRE_THAT(outcome_distribution(fine, rho, eps).probs.sum(), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("is_rank1 distinguishes collapsed from mixed targets", "[channel]") {
  REQUIRE(is_rank1(element({2, 2, 2}, {1.0, 0.0, 0.0}, {0, 0, 0}, {0, 0, 0})));
  REQUIRE_FALSE(is_rank1(element({0, 1, 1}, {1.0, 0.0, 0.0}, {0, 0, 0}, {0, 0, 0})));
}

TEST_CASE("apply_channel returns normalized outcomes and drops empty ones", "[channel]") {
  PioChannel<double> ch = witness_channel<double>(3, 1, 2, 0.1);

  // State supported only on the third A level: the probe outcomes are empty.
  Vector<double> a = Vector<double>::Zero(3);
  a[2] = 1.0;
  Vector<double> b(2);
  b << std::sqrt(0.5), std::sqrt(0.5);
  DensityMatrix<double> corner = product_state(a, b);
  ApplyResult<double> res = apply_channel(ch, corner, 0.5);
  REQUIRE_THAT(res.probs.sum(), WithinAbs(1.0, 1e-12));
  REQUIRE_FALSE(res.post_states[0].has_value());
  REQUIRE_FALSE(res.post_states[1].has_value());
  REQUIRE(res.post_states[2].has_value());
  REQUIRE_THAT(res.post_states[2]->mat.trace().real(), WithinAbs(1.0, 1e-12));

  Rng rng(5);
  DensityMatrix<double> rho = random_bipartite<double>(rng, 3, 3);
  ApplyResult<double> full = apply_channel(ch, rho, 0.0);
  REQUIRE_THAT(full.probs.sum(), WithinAbs(1.0, 1e-12));
  for (const auto& st : full.post_states) {
    REQUIRE(st.has_value());
    REQUIRE_NOTHROW(validate_density(st->mat, st->dim_a, st->dim_b));
  }

  DensityMatrix<double> wrong = random_bipartite<double>(rng, 2, 2);
  REQUIRE_THROWS_AS(apply_channel(ch, wrong, 0.0), ValidationError);
}

TEST_CASE("luders_dephase produces block-diagonal states", "[channel]") {
  Rng rng(61);
  DensityMatrix<double> rho = random_bipartite<double>(rng, 3, 2);
  REQUIRE_FALSE(is_partial_incoherent(rho));
  DensityMatrix<double> pinched = luders_dephase(rho);
  REQUIRE(is_partial_incoherent(pinched));
  REQUIRE_NOTHROW(validate_density(pinched.mat, 3, 2));
  // Diagonal blocks untouched.
  for (Index i = 0; i < 3; ++i)
    REQUIRE((pinched.mat.block(i * 2, i * 2, 2, 2) - rho.mat.block(i * 2, i * 2, 2, 2))
                .cwiseAbs()
                .maxCoeff() == 0.0);
  REQUIRE(is_partial_incoherent(luders_dephase(pinched)));
}

TEST_CASE("diagonal reduced state is weaker than block-diagonality", "[channel]") {
  // Maximally entangled two-qubit state: off-diagonal blocks are nonzero but
  // traceless, so the reduced state is diagonal while the state is not
  // block-diagonal.
  Matrix<double> bell = Matrix<double>::Zero(4, 4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
  DensityMatrix<double> rho{2, 2, bell};
  REQUIRE(has_diagonal_reduced(rho));
  REQUIRE_FALSE(is_partial_incoherent(rho));
  REQUIRE(is_partial_incoherent(block_diagonal_state()));
  REQUIRE(has_diagonal_reduced(block_diagonal_state()));
}

TEST_CASE("states with diagonal reduced state give zero FI for every channel", "[channel]") {
  Matrix<double> bell = Matrix<double>::Zero(4, 4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
  DensityMatrix<double> rho{2, 2, bell};

  Rng rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    PioChannel<double> ch = random_g_channel<double>(rng, 2, 2, 1);
    const double fi = classical_fi(outcome_distribution(ch, rho, 0.4));
    REQUIRE(std::abs(fi) < 1e-12);
  }
  PioChannel<double> probe = witness_channel<double>(2, 1, 2, 1.1);
  REQUIRE(std::abs(classical_fi(outcome_distribution(probe, rho, 0.0))) < 1e-12);
}
