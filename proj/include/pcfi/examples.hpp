#pragma once

#include <cmath>

#include "pcfi/channel.hpp"
#include "pcfi/linalg.hpp"
#include "pcfi/qsd.hpp"
#include "pcfi/types.hpp"

// Built-in reference states, channels, and ensembles used by the
// reproduce-examples command and mirrored by the JSON files under data/.
namespace pcfi {
namespace examples {

inline DensityMatrix<double> product_state(const Vector<double>& a, const Vector<double>& b) {
  DensityMatrix<double> rho;
  rho.dim_a = a.size();
  rho.dim_b = b.size();
  Vector<double> psi = Vector<double>::Zero(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) psi[i * b.size() + j] = a[i] * b[j];
  rho.mat = psi * psi.adjoint();
  return rho;
}

// Three 3x3 product probe states used by the bundled examples.
inline DensityMatrix<double> state_1() {
  Vector<double> a(3), b(3);
  a << 1.0 / std::sqrt(2.0), 0.5, 0.5;
  b << 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
  return product_state(a, b);
}

inline DensityMatrix<double> state_2() {
  Vector<double> a(3), b(3);
  a << 1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0;
  b << 1.0 / std::sqrt(2.0), 0.5, 0.5;
  return product_state(a, b);
}

inline DensityMatrix<double> state_3() {
  Vector<double> a(3), b(3);
  const double s = 1.0 / std::sqrt(3.0);
  a << s, s, s;
  b << 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0);
  return product_state(a, b);
}

// The bundled nine-element rank-1 channel on a three-level probe: three
// harmonic triples with cube-root phases, coefficient weights sqrt(2/15) and
// sqrt(1/5), and binary phase slopes. Elements 1-3 are slope-sensitive on
// index 2, elements 4-9 on index 1.
inline PioChannel<double> reference_channel() {
  const double w = std::sqrt(2.0 / 15.0);
  const double v = std::sqrt(1.0 / 5.0);
  const auto ph = [](int k) {  // e^{i 2 pi k / 3}
    return std::polar(1.0, 2.0 * kPi * k / 3.0);
  };
  PioChannel<double> ch;
  ch.dim_a = 3;
  const auto add = [&](Index target, const Vector<double>& coeffs, double d1, double d2,
                       double d3) {
    KrausElement<double> el;
    el.targets.assign(3, target);
    el.coeffs = coeffs;
    el.phase0 = RealVector<double>::Zero(3);
    el.deriv = RealVector<double>(3);
    el.deriv << d1, d2, d3;
    ch.elements.push_back(std::move(el));
  };
  Vector<double> c(3);
  for (int t = 0; t < 3; ++t) {  // elements 1-3: support {2, 3}, slope on index 2
    c << 0.0, w * ph(-t), v * ph(t);
    add(1, c, 0, 1, 0);
  }
  for (int t = 0; t < 3; ++t) {  // elements 4-6: support {1, 2}, slope on index 1
    c << w, v * ph(t), 0.0;
    add(0, c, 1, 0, 0);
  }
  for (int t = 0; t < 3; ++t) {  // elements 7-9: support {1, 3}, slope on index 1
    c << v, 0.0, w * ph(t);
    add(0, c, 1, 0, 0);
  }
  return ch;
}

// Two perfectly distinguishable hypotheses.
inline QsdEnsemble<double> orthogonal_ensemble() {
  QsdEnsemble<double> ens;
  ens.priors = RealVector<double>(2);
  ens.priors << 0.5, 0.5;
  Matrix<double> s0 = Matrix<double>::Zero(2, 2), s1 = Matrix<double>::Zero(2, 2);
  s0(0, 0) = 1.0;
  s1(1, 1) = 1.0;
  ens.states = {s0, s1};
  return ens;
}

// Three symmetric pure qubit states at mutual angle 2 pi / 3; the
// pretty-good measurement succeeds with probability 2/3.
inline QsdEnsemble<double> trine_ensemble() {
  QsdEnsemble<double> ens;
  ens.priors = RealVector<double>(3);
  ens.priors << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
  for (int k = 0; k < 3; ++k) {
    const double th = 2.0 * kPi * k / 3.0;
    Vector<double> v(2);
    v << std::cos(th / 2.0), std::sin(th / 2.0);
    ens.states.push_back(v * v.adjoint());
  }
  return ens;
}

// A block-diagonal (dephasing-invariant) two-qubit state: zero measure.
inline DensityMatrix<double> block_diagonal_state() {
  DensityMatrix<double> rho;
  rho.dim_a = 2;
  rho.dim_b = 2;
  rho.mat = Matrix<double>::Zero(4, 4);
  // 0.6 |0><0| (x) tau0 + 0.4 |1><1| (x) tau1 with distinct qubit states.
  Matrix<double> tau0(2, 2), tau1(2, 2);
  tau0 << Complex<double>(0.7, 0.0), Complex<double>(0.2, 0.1), Complex<double>(0.2, -0.1),
      Complex<double>(0.3, 0.0);
  tau1 << Complex<double>(0.5, 0.0), Complex<double>(0.0, -0.25), Complex<double>(0.0, 0.25),
      Complex<double>(0.5, 0.0);
  rho.mat.block(0, 0, 2, 2) = 0.6 * tau0;
  rho.mat.block(2, 2, 2, 2) = 0.4 * tau1;
  return rho;
}

}  // namespace examples
}  // namespace pcfi
