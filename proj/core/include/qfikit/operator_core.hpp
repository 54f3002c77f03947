#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qfikit/errors.hpp"
#include "qfikit/tolerances.hpp"

namespace qfikit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Elementwise max-norm; the norm used by every tolerance check below.
double max_norm(const ComplexMatrix& m);

// Square complex matrix validated Hermitian to tol * (1 + max |entry|).
class HermitianOperator {
 public:
  explicit HermitianOperator(ComplexMatrix m,
                             double tol = Tolerances::standard().hermiticity);

  // (X + X^dag)/2 of an almost-Hermitian matrix; for producers whose result
  // carries known floating-point asymmetry.
  static HermitianOperator symmetrized(const ComplexMatrix& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }

 private:
  ComplexMatrix m_;
};

// Eigenvalues ascending; eigenvector columns orthonormal, phase-fixed so the
// first largest-magnitude component is real positive, degenerate groups
// ordered lexicographically.  Deterministic for identical input.
struct SpectralDecomposition {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;  // columns
};

SpectralDecomposition spectral_decompose(
    const HermitianOperator& h, const Tolerances& tol = Tolerances::standard());

// U = exp(-i t H) through the spectral decomposition V diag(e^{-i t l}) V^dag.
ComplexMatrix evolve_unitary(const HermitianOperator& h, double t,
                             const Tolerances& tol = Tolerances::standard());

// n-fold nested commutator A^{x n}(X); n = 0 returns X.
ComplexMatrix adjoint_apply(const ComplexMatrix& a, const ComplexMatrix& x,
                            int n = 1);

// Unit-trace positive semidefinite Hermitian operator; caches its
// eigensystem.  support_threshold is relative to the largest eigenvalue.
class DensityMatrix {
 public:
  explicit DensityMatrix(HermitianOperator op,
                         double support_threshold = Tolerances::standard().support,
                         const Tolerances& tol = Tolerances::standard());

  static DensityMatrix pure(const ComplexVector& psi,
                            const Tolerances& tol = Tolerances::standard());

  int dim() const { return op_.dim(); }
  const ComplexMatrix& matrix() const { return op_.matrix(); }
  const HermitianOperator& hermitian() const { return op_; }
  const SpectralDecomposition& eigensystem() const { return eig_; }
  double support_threshold() const { return support_threshold_; }
  // Absolute eigenvalue cutoff: support_threshold * largest eigenvalue.
  double support_cutoff() const;
  double purity() const;

 private:
  HermitianOperator op_;
  SpectralDecomposition eig_;
  double support_threshold_;
};

struct BlochVector {
  double x = 0;
  double y = 0;
  double z = 0;
  double norm() const;
};

// dim = 2 only; r_k = Re Tr(rho sigma_k).
BlochVector bloch_from_density(const DensityMatrix& rho);
// rho = (I + r . sigma)/2; requires |r| <= 1 (within positivity tolerance).
DensityMatrix density_from_bloch(const BlochVector& r,
                                 const Tolerances& tol = Tolerances::standard());

}  // namespace qfikit
