#include "qfikit/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace qfikit {

const Tolerances& Tolerances::standard() {
  static const Tolerances t{};
  return t;
}

double max_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

namespace {

void require_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite entries");
}

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw ValidationError(std::string(what) + ": matrix must be square and non-empty");
}

// Rotates each column so its first largest-magnitude component is real
// positive.
void fix_phases(ComplexMatrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index pivot = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      double a = std::abs(v(r, c));
      if (a > best) {
        best = a;
        pivot = r;
      }
    }
    if (best > 0.0) v.col(c) *= std::conj(v(pivot, c)) / best;
  }
}

bool lex_less(const ComplexMatrix& v, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    const Complex& x = v(r, a);
    const Complex& y = v(r, b);
    if (x.real() != y.real()) return x.real() < y.real();
    if (x.imag() != y.imag()) return x.imag() < y.imag();
  }
  return false;
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix m, double tol) : m_(std::move(m)) {
  require_square(m_, "HermitianOperator");
  require_finite(m_, "HermitianOperator");
  double asym = max_norm(m_ - m_.adjoint());
  double scale = 1.0 + max_norm(m_);
  if (asym > tol * scale)
    throw ValidationError("HermitianOperator: matrix not Hermitian (asymmetry " +
                          std::to_string(asym) + ")");
}

HermitianOperator HermitianOperator::symmetrized(const ComplexMatrix& m) {
  require_square(m, "HermitianOperator::symmetrized");
  require_finite(m, "HermitianOperator::symmetrized");
  return HermitianOperator(((m + m.adjoint()) / 2.0).eval());
}

SpectralDecomposition spectral_decompose(const HermitianOperator& h, const Tolerances& tol) {
  const ComplexMatrix& m = h.matrix();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw ValidationError("spectral_decompose: eigensolver failed");

  RealVector vals = solver.eigenvalues();
  ComplexMatrix vecs = solver.eigenvectors();
  fix_phases(vecs);

  // Eigen returns ascending eigenvalues; exact ties are ordered
  // lexicographically by phase-fixed eigenvector entries.
  std::vector<Eigen::Index> order(static_cast<size_t>(vals.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (vals[a] != vals[b]) return vals[a] < vals[b];
    return lex_less(vecs, a, b);
  });

  SpectralDecomposition out;
  out.eigenvalues.resize(vals.size());
  out.eigenvectors.resize(vecs.rows(), vecs.cols());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    out.eigenvalues[i] = vals[order[static_cast<size_t>(i)]];
    out.eigenvectors.col(i) = vecs.col(order[static_cast<size_t>(i)]);
  }

  double ortho = max_norm(out.eigenvectors.adjoint() * out.eigenvectors -
                          ComplexMatrix::Identity(m.rows(), m.cols()));
  if (ortho > tol.orthonormality)
    throw ValidationError("spectral_decompose: eigenvector orthonormality " +
                          std::to_string(ortho));
  ComplexMatrix rebuilt = out.eigenvectors * out.eigenvalues.asDiagonal() *
                          out.eigenvectors.adjoint();
  double recon = max_norm(rebuilt - m);
  if (recon > tol.reconstruction * (1.0 + max_norm(m)))
    throw ValidationError("spectral_decompose: reconstruction residual " +
                          std::to_string(recon));
  return out;
}

ComplexMatrix evolve_unitary(const HermitianOperator& h, double t, const Tolerances& tol) {
  if (!std::isfinite(t)) throw ValidationError("evolve_unitary: non-finite time");
  SpectralDecomposition es = spectral_decompose(h, tol);
  ComplexVector phases(es.eigenvalues.size());
  for (Eigen::Index i = 0; i < es.eigenvalues.size(); ++i)
    phases[i] = std::exp(Complex(0.0, -t * es.eigenvalues[i]));
  ComplexMatrix u = es.eigenvectors * phases.asDiagonal() * es.eigenvectors.adjoint();
  double uerr = max_norm(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
  if (uerr > tol.unitarity)
    throw ValidationError("evolve_unitary: unitarity residual " + std::to_string(uerr));
  return u;
}

ComplexMatrix adjoint_apply(const ComplexMatrix& a, const ComplexMatrix& x, int n) {
  require_square(a, "adjoint_apply");
  if (a.rows() != x.rows() || a.cols() != x.cols())
    throw ValidationError("adjoint_apply: dimension mismatch");
  if (n < 0) throw ValidationError("adjoint_apply: negative order");
  ComplexMatrix r = x;
  for (int k = 0; k < n; ++k) r = a * r - r * a;
  return r;
}

DensityMatrix::DensityMatrix(HermitianOperator op, double support_threshold,
                             const Tolerances& tol)
    : op_(std::move(op)), eig_(spectral_decompose(op_, tol)),
      support_threshold_(support_threshold) {
  if (support_threshold_ < 0)
    throw ValidationError("DensityMatrix: negative support threshold");
  double tr = op_.matrix().trace().real();
  if (std::abs(tr - 1.0) > tol.trace)
    throw ValidationError("DensityMatrix: trace " + std::to_string(tr));
  if (eig_.eigenvalues.minCoeff() < -tol.positivity)
    throw ValidationError("DensityMatrix: negative eigenvalue " +
                          std::to_string(eig_.eigenvalues.minCoeff()));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi, const Tolerances& tol) {
  double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-12)
    throw ValidationError("DensityMatrix::pure: state norm " + std::to_string(n));
  ComplexMatrix p = psi * psi.adjoint();
  return DensityMatrix(HermitianOperator(std::move(p)), tol.support, tol);
}

double DensityMatrix::support_cutoff() const {
  return support_threshold_ * eig_.eigenvalues.maxCoeff();
}

double DensityMatrix::purity() const {
  return (op_.matrix() * op_.matrix()).trace().real();
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector bloch_from_density(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw ValidationError("bloch_from_density: dim != 2");
  const ComplexMatrix& m = rho.matrix();
  BlochVector r;
  r.x = 2.0 * m(0, 1).real();
  r.y = -2.0 * m(0, 1).imag();
  r.z = (m(0, 0) - m(1, 1)).real();
  return r;
}

DensityMatrix density_from_bloch(const BlochVector& r, const Tolerances& tol) {
  double n = r.norm();
  if (n > 1.0 + tol.positivity)
    throw ValidationError("density_from_bloch: |r| = " + std::to_string(n) + " > 1");
  ComplexMatrix m(2, 2);
  m(0, 0) = Complex(1.0 + r.z, 0.0) / 2.0;
  m(1, 1) = Complex(1.0 - r.z, 0.0) / 2.0;
  m(0, 1) = Complex(r.x, -r.y) / 2.0;
  m(1, 0) = Complex(r.x, r.y) / 2.0;
  return DensityMatrix(HermitianOperator(std::move(m)), tol.support, tol);
}

}  // namespace qfikit
