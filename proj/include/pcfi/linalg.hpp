#pragma once

#include <cmath>
#include <sstream>
#include <string>

#include "pcfi/types.hpp"

// Dense complex primitives: Kronecker product, partial trace, Hermitian
// eigendecomposition with a deterministic phase convention, PSD square root,
// trace norm, and density-matrix validation.
namespace pcfi {

// Kronecker product with a's indices major, so tensor(A, B) acts on the
// composite index a*rows(B)+b. Works on any Eigen expression.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> tensor(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Out = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Out out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Derived>
typename Derived::RealScalar herm_residual(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar frobenius(const Eigen::MatrixBase<Derived>& m) {
  return m.norm();
}

// (rho_A)_{nm} = sum_b <n,b|rho|m,b>.
template <typename Real>
Matrix<Real> partial_trace_b(const Matrix<Real>& m, Index dim_a, Index dim_b) {
  if (dim_a < 1 || dim_b < 1 || m.rows() != dim_a * dim_b || m.cols() != m.rows())
    throw ValidationError("partial_trace_b: matrix size does not match dim_a*dim_b");
  Matrix<Real> out = Matrix<Real>::Zero(dim_a, dim_a);
  for (Index n = 0; n < dim_a; ++n)
    for (Index mm = 0; mm < dim_a; ++mm)
      for (Index b = 0; b < dim_b; ++b)
        out(n, mm) += m(n * dim_b + b, mm * dim_b + b);
  return out;
}

template <typename Real>
Matrix<Real> partial_trace_b(const DensityMatrix<Real>& rho) {
  return partial_trace_b(rho.mat, rho.dim_a, rho.dim_b);
}

template <typename Real>
struct HermEig {
  RealVector<Real> values;  // sorted descending
  Matrix<Real> vectors;     // orthonormal columns, column k pairs with values[k]
};

// Eigendecomposition of a Hermitian matrix. Eigenvalues come back descending;
// each eigenvector is rotated so its first component of nonnegligible
// magnitude is real and positive, which keeps repeated runs and downstream
// certificates bit-stable.
template <typename Real>
HermEig<Real> herm_eig(const Matrix<Real>& m, const Tolerances<Real>& tol = {}) {
  if (m.rows() != m.cols()) throw ValidationError("herm_eig: matrix is not square");
  const Real res = herm_residual(m);
  if (res > tol.herm) {
    std::ostringstream os;
    os << "herm_eig: input not Hermitian (residual " << res << " > " << tol.herm << ")";
    throw ValidationError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(((m + m.adjoint()) / Real(2)).eval());
  if (es.info() != Eigen::Success) throw NumericError("herm_eig: eigensolver failed");

  const Index n = m.rows();
  HermEig<Real> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.values[k] = es.eigenvalues()[n - 1 - k];  // flip ascending -> descending
    out.vectors.col(k) = es.eigenvectors().col(n - 1 - k);
    for (Index i = 0; i < n; ++i) {
      const Real mag = std::abs(out.vectors(i, k));
      if (mag > Real(1e-12)) {
        out.vectors.col(k) *= std::conj(out.vectors(i, k)) / mag;
        break;
      }
    }
  }
  return out;
}

// Hermitian PSD square root: eigenvalues clamped at zero, so slightly
// negative noise eigenvalues are tolerated up to tol.psd.
template <typename Real>
Matrix<Real> psd_sqrt(const Matrix<Real>& m, const Tolerances<Real>& tol = {}) {
  HermEig<Real> eig = herm_eig(m, tol);
  if (eig.values.size() > 0 && eig.values.minCoeff() < -tol.psd) {
    std::ostringstream os;
    os << "psd_sqrt: input not PSD (eigenvalue " << eig.values.minCoeff() << " < -"
       << tol.psd << ")";
    throw ValidationError(os.str());
  }
  RealVector<Real> roots = eig.values.cwiseMax(Real(0)).cwiseSqrt();
  return eig.vectors * roots.template cast<Complex<Real>>().asDiagonal() *
         eig.vectors.adjoint();
}

// Sum of singular values. For Hermitian input this is the sum of absolute
// eigenvalues, which is what the Helstrom bound consumes.
template <typename Real>
Real trace_norm(const Matrix<Real>& m) {
  if (m.size() == 0) return Real(0);
  Eigen::JacobiSVD<Matrix<Real>> svd(m);
  return svd.singularValues().sum();
}

// Checks the density-matrix invariants and reports which one failed and by
// how much. The returned value keeps the input matrix as-is.
template <typename Real>
DensityMatrix<Real> validate_density(const Matrix<Real>& m, Index dim_a, Index dim_b,
                                     const Tolerances<Real>& tol = {}) {
  std::ostringstream os;
  if (dim_a < 1 || dim_b < 1) {
    os << "validate_density: dimensions must be positive (dim_a=" << dim_a
       << ", dim_b=" << dim_b << ")";
    throw ValidationError(os.str());
  }
  if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b) {
    os << "validate_density: size mismatch (" << m.rows() << "x" << m.cols()
       << " vs expected " << dim_a * dim_b << ")";
    throw ValidationError(os.str());
  }
  const Real hres = herm_residual(m);
  if (hres > tol.herm) {
    os << "validate_density: non-Hermitian (residual " << hres << " > " << tol.herm << ")";
    throw ValidationError(os.str());
  }
  const Real tres = std::abs(m.trace() - Complex<Real>(1));
  if (tres > tol.trace) {
    os << "validate_density: trace differs from 1 by " << tres << " (> " << tol.trace << ")";
    throw ValidationError(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix<Real>> es(((m + m.adjoint()) / Real(2)).eval(),
                                                 Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("validate_density: eigensolver failed");
  const Real lmin = es.eigenvalues().minCoeff();
  if (lmin < -tol.psd) {
    os << "validate_density: negative eigenvalue " << lmin << " (< -" << tol.psd << ")";
    throw ValidationError(os.str());
  }
  return DensityMatrix<Real>{dim_a, dim_b, m};
}

}  // namespace pcfi
