#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

// Core value types shared by every module. All linear algebra is dense
// complex Eigen, templated on the real scalar (double everywhere in the CLI;
// long double works for cross-checking).
namespace pcfi {

template <typename Real = double>
using Complex = std::complex<Real>;

template <typename Real = double>
using Matrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real = double>
using Vector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real = double>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Input failed structural validation (bad file, broken invariant, bad
// precondition). The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Inputs are structurally fine but the requested computation is undefined for
// them (zero Fisher information, eigensolver failure). CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical tolerances. Defaults are tuned for double precision at the
// matrix sizes this library targets (n <= 64); all overridable via config.
template <typename Real = double>
struct Tolerances {
  Real herm = Real(1e-10);    // max |m(i,j) - conj(m(j,i))| allowed
  Real trace = Real(1e-10);   // |tr(m) - 1| allowed
  Real psd = Real(1e-9);      // most negative eigenvalue allowed (as -psd)
  Real eig = Real(1e-9);      // eigendecomposition reconstruction error
  Real sqrt = Real(1e-9);     // ||S*S - m||_F allowed in psd_sqrt
  Real p_floor = Real(1e-12); // outcomes below this are dropped from FI sums
};

// Bipartite density matrix. The composite index is row-major in (a, b):
// basis state |a,b> sits at index a*dim_b + b.
template <typename Real = double>
struct DensityMatrix {
  Index dim_a = 0;
  Index dim_b = 0;
  Matrix<Real> mat;

  Index dim() const { return dim_a * dim_b; }
};

}  // namespace pcfi
