#include "qfikit/qfi_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qfikit/errors.hpp"

namespace qfikit {

namespace {

constexpr Complex kI{0.0, 1.0};

ComplexMatrix to_eigenbasis(const SpectralDecomposition& es, const HermitianOperator& h) {
  if (h.dim() != es.eigenvalues.size())
    throw ValidationError("generator dimension does not match state dimension");
  return es.eigenvectors.adjoint() * h.matrix() * es.eigenvectors;
}

// <H^2>_i - <H>_i^2 from row i of H in the state eigenbasis.
double row_variance(const ComplexMatrix& hm, Eigen::Index i) {
  const double mean = hm(i, i).real();
  return hm.row(i).squaredNorm() - mean * mean;
}

double clamp_qfi(double f) {
  if (f < 0.0 && f >= -Tolerances::standard().qfi_clamp) return 0.0;
  return f;
}

void check_unit(const ComplexVector& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-12)
    throw ValidationError("state vector is not normalized");
}

void validate_qfi_matrix(const QFIMatrix& qm, const char* context) {
  const auto& e = qm.entries;
  const double scale = 1.0 + max_norm(e);
  if (max_norm(e - e.adjoint()) > 1e-10 * scale)
    throw ValidationError(std::string(context) + ": matrix is not Hermitian");
  double trace = 0.0;
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    if (e(i, i).real() < -1e-10 * scale)
      throw ValidationError(std::string(context) + ": negative diagonal entry");
    trace += e(i, i).real();
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(
      ComplexMatrix((e + e.adjoint()) / 2.0));
  const double floor = 1e-8 * std::max(trace, 0.0) + 1e-12 * scale;
  if (solver.eigenvalues().minCoeff() < -floor)
    throw ValidationError(std::string(context) + ": matrix is not positive semidefinite");
}

}  // namespace

// ---- ExponentialState -------------------------------------------------------

ExponentialState::ExponentialState(const HermitianOperator& g0, const Tolerances& tol)
    : generator_(g0), eig_(spectral_decompose(g0, tol)) {
  double trace = 0.0;
  for (Eigen::Index i = 0; i < eig_.eigenvalues.size(); ++i)
    trace += std::exp(eig_.eigenvalues(i));
  if (std::abs(trace - 1.0) > 1e-10)
    throw ValidationError("ExponentialState: Tr exp(G0) deviates from 1");
}

ExponentialState ExponentialState::from_generator(const HermitianOperator& g,
                                                  const Tolerances& tol) {
  SpectralDecomposition eig = spectral_decompose(g, tol);
  double trace = 0.0;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i)
    trace += std::exp(eig.eigenvalues(i));
  if (!(trace > 0.0) || !std::isfinite(trace))
    throw ValidationError("ExponentialState: Tr exp(g) is not a positive finite number");
  const double shift = std::log(trace);
  ComplexMatrix m = g.matrix() -
      shift * ComplexMatrix::Identity(g.dim(), g.dim());
  eig.eigenvalues.array() -= shift;
  return ExponentialState(HermitianOperator(m), std::move(eig));
}

DensityMatrix ExponentialState::density() const {
  const auto n = eig_.eigenvalues.size();
  RealVector p(n);
  for (Eigen::Index i = 0; i < n; ++i) p(i) = std::exp(eig_.eigenvalues(i));
  p /= p.sum();  // remove the <= 1e-10 trace residue
  ComplexMatrix m = eig_.eigenvectors * p.asDiagonal().toDenseMatrix().cast<Complex>() *
                    eig_.eigenvectors.adjoint();
  return DensityMatrix(HermitianOperator(m));
}

// ---- SLD series coefficients ------------------------------------------------

SLDCoefficients sld_coefficients(int order) {
  if (order < 0) throw ValidationError("sld_coefficients: order must be >= 0");
  if (order % 2 != 0) throw ValidationError("sld_coefficients: order must be even");
  using boost::multiprecision::cpp_int;

  // Bernoulli numbers by sum_{k=0}^{m} C(m+1,k) B_k = 0, B_1 = -1/2.
  std::vector<Rational> b(order + 3);
  b[0] = 1;
  for (int m = 1; m <= order + 2; ++m) {
    Rational s = 0;
    cpp_int comb = 1;  // C(m+1, 0)
    for (int k = 0; k < m; ++k) {
      s += Rational(comb) * b[k];
      comb = comb * (m + 1 - k) / (k + 1);
    }
    b[m] = -s / (m + 1);
  }

  SLDCoefficients out;
  out.order = order;
  out.g.assign(order + 1, 0.0);
  cpp_int fact = 2;  // (n+2)! at n = 0
  for (int n = 0; n <= order; ++n) {
    if (n > 0) fact *= cpp_int(n + 2);
    if (n % 2 != 0) continue;
    const cpp_int two_pow = (cpp_int(1) << (n + 2)) - 1;
    const Rational g = Rational(4 * two_pow) * b[n + 2] / Rational(fact);
    out.g[n] = g.convert_to<double>();
  }
  out.bernoulli.assign(b.begin() + 2, b.end());
  return out;
}

// ---- Single-parameter QFI ---------------------------------------------------

double qfi_mixed(const DensityMatrix& rho, const HermitianOperator& h) {
  const SpectralDecomposition& es = rho.eigensystem();
  const ComplexMatrix hm = to_eigenbasis(es, h);
  const RealVector& p = es.eigenvalues;
  const double cutoff = rho.support_cutoff();
  const auto n = p.size();

  double f = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (p(i) <= cutoff) continue;
    f += 4.0 * p(i) * row_variance(hm, i);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j || p(i) + p(j) <= cutoff) continue;
      f -= 8.0 * p(i) * p(j) / (p(i) + p(j)) * std::norm(hm(i, j));
    }
  return clamp_qfi(f);
}

double qfi_qubit(const DensityMatrix& rho, const HermitianOperator& h) {
  if (rho.dim() != 2) throw ValidationError("qfi_qubit: state dimension must be 2");
  const SpectralDecomposition& es = rho.eigensystem();
  const ComplexMatrix hm = to_eigenbasis(es, h);
  const double v0 = row_variance(hm, 0);
  const double v1 = row_variance(hm, 1);
  if (std::abs(v0 - v1) > 1e-10 * (1.0 + std::abs(v0) + std::abs(v1)))
    throw ValidationError("qfi_qubit: eigenstate variances disagree");
  return clamp_qfi(4.0 * (2.0 * rho.purity() - 1.0) * v0);
}

double qfi_pure(const ComplexVector& psi, const HermitianOperator& h) {
  check_unit(psi);
  if (psi.size() != h.dim()) throw ValidationError("qfi_pure: dimension mismatch");
  const ComplexVector hv = h.matrix() * psi;
  const double mean = psi.dot(hv).real();
  return clamp_qfi(4.0 * (hv.squaredNorm() - mean * mean));
}

HermitianOperator sld_effective_pure(const ComplexVector& psi,
                                     const HermitianOperator& h) {
  check_unit(psi);
  if (psi.size() != h.dim())
    throw ValidationError("sld_effective_pure: dimension mismatch");
  const ComplexMatrix proj = psi * psi.adjoint();
  const ComplexMatrix l = 2.0 * kI * (h.matrix() * proj - proj * h.matrix());
  HermitianOperator out(l);

  const double scale = 1.0 + max_norm(l);
  const Complex tr = (proj * l).trace();
  if (std::abs(tr) > 1e-12 * scale)
    throw ValidationError("sld_effective_pure: nonzero expectation on the state");
  const ComplexVector lv = l * psi;
  const double f = qfi_pure(psi, h);
  if (std::abs(lv.squaredNorm() - f) > 1e-10 * (1.0 + f))
    throw ValidationError("sld_effective_pure: <L^2> does not match the Fisher information");
  return out;
}

HermitianOperator sld_effective_exponential(const ExponentialState& state,
                                            const HermitianOperator& h,
                                            int order) {
  if (order < 0 || order % 2 != 0)
    throw ValidationError("sld_effective_exponential: order must be even and >= 0");
  if (h.dim() != state.dim())
    throw ValidationError("sld_effective_exponential: dimension mismatch");
  const SLDCoefficients coeff = sld_coefficients(order);

  ComplexMatrix l = ComplexMatrix::Zero(h.dim(), h.dim());
  ComplexMatrix cur = h.matrix();
  double w0 = 0.0, w1 = 0.0, w2 = 0.0;  // last three even-term norms
  int seen = 0;
  for (int m = 1; m <= order + 1; ++m) {
    cur = adjoint_apply(state.generator().matrix(), cur, 1);
    const int n = m - 1;
    if (n % 2 != 0) continue;
    l += -kI * coeff.g[n] * cur;
    w0 = w1;
    w1 = w2;
    w2 = std::abs(coeff.g[n]) * max_norm(cur);
    ++seen;
    if (seen >= 3 && w2 > w1 && w1 > w0) {
      std::ostringstream msg;
      msg << "sld_effective_exponential: term norms growing at order " << n
          << " (" << w0 << " -> " << w1 << " -> " << w2
          << "); use the tanh closed form instead";
      throw ConvergenceError(msg.str(), w2);
    }
  }

  const double asym = max_norm(l - l.adjoint()) / 2.0;
  if (asym > 1e-10 * (1.0 + max_norm(l)))
    throw ValidationError("sld_effective_exponential: result is not Hermitian");
  return HermitianOperator::symmetrized(l);
}

HermitianOperator sld_effective_exponential_tanh(const ExponentialState& state,
                                                 const HermitianOperator& h) {
  if (h.dim() != state.dim())
    throw ValidationError("sld_effective_exponential_tanh: dimension mismatch");
  const SpectralDecomposition& es = state.eigensystem();
  const ComplexMatrix hm = to_eigenbasis(es, h);
  const auto n = hm.rows();
  ComplexMatrix lm(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      lm(i, j) = -2.0 * kI * std::tanh((es.eigenvalues(i) - es.eigenvalues(j)) / 2.0) *
                 hm(i, j);
  return HermitianOperator(es.eigenvectors * lm * es.eigenvectors.adjoint());
}

double qfi_exponential(const ExponentialState& state, const HermitianOperator& h) {
  if (h.dim() != state.dim())
    throw ValidationError("qfi_exponential: dimension mismatch");
  const SpectralDecomposition& es = state.eigensystem();
  const ComplexMatrix hm = to_eigenbasis(es, h);
  const auto n = hm.rows();
  double f = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double th = std::tanh((es.eigenvalues(i) - es.eigenvalues(j)) / 2.0);
      f += 4.0 * (std::exp(es.eigenvalues(i)) + std::exp(es.eigenvalues(j))) * th * th *
           std::norm(hm(i, j));
    }
  return clamp_qfi(f);
}

// ---- Multiparameter ---------------------------------------------------------

QFIMatrix qfi_matrix(const DensityMatrix& rho,
                     const std::vector<HermitianOperator>& hs) {
  if (hs.empty()) throw ValidationError("qfi_matrix: need at least one generator");
  const SpectralDecomposition& es = rho.eigensystem();
  const RealVector& p = es.eigenvalues;
  const double cutoff = rho.support_cutoff();
  const auto dim = p.size();
  const int np = static_cast<int>(hs.size());

  std::vector<ComplexMatrix> hm;
  hm.reserve(hs.size());
  for (const auto& h : hs) hm.push_back(to_eigenbasis(es, h));

  QFIMatrix out;
  out.entries = ComplexMatrix::Zero(np, np);
  for (int a = 0; a < np; ++a)
    for (int bb = a; bb < np; ++bb) {
      double val = 0.0;
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (p(i) <= cutoff) continue;
        Complex second{0.0, 0.0};  // <psi_i| H_a H_b |psi_i>
        for (Eigen::Index k = 0; k < dim; ++k) second += hm[a](i, k) * hm[bb](k, i);
        const double cov = second.real() - hm[a](i, i).real() * hm[bb](i, i).real();
        val += 4.0 * p(i) * cov;
      }
      for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) {
          if (i == j || p(i) + p(j) <= cutoff) continue;
          val -= 8.0 * p(i) * p(j) / (p(i) + p(j)) *
                 (hm[a](i, j) * hm[bb](j, i)).real();
        }
      out.entries(a, bb) = val;
      out.entries(bb, a) = val;
    }

  for (int a = 0; a < np; ++a) {
    const double diag = out.entries(a, a).real();
    const double f = qfi_mixed(rho, hs[a]);
    if (std::abs(diag - f) > 1e-10 * (1.0 + std::abs(f)))
      throw ValidationError("qfi_matrix: diagonal disagrees with the scalar Fisher information");
  }
  out.flavor = QFIFlavor::sld;
  validate_qfi_matrix(out, "qfi_matrix");
  return out;
}

QFIMatrix qfi_matrix_pure(const ComplexVector& psi,
                          const std::vector<HermitianOperator>& hs) {
  if (hs.empty()) throw ValidationError("qfi_matrix_pure: need at least one generator");
  check_unit(psi);
  const int np = static_cast<int>(hs.size());
  std::vector<ComplexVector> hv;
  std::vector<double> mean;
  hv.reserve(hs.size());
  mean.reserve(hs.size());
  for (const auto& h : hs) {
    if (h.dim() != psi.size())
      throw ValidationError("qfi_matrix_pure: dimension mismatch");
    hv.push_back(h.matrix() * psi);
    mean.push_back(psi.dot(hv.back()).real());
  }

  QFIMatrix out;
  out.entries = ComplexMatrix::Zero(np, np);
  for (int a = 0; a < np; ++a)
    for (int bb = a; bb < np; ++bb) {
      const double cov = hv[a].dot(hv[bb]).real() - mean[a] * mean[bb];
      out.entries(a, bb) = 4.0 * cov;
      out.entries(bb, a) = 4.0 * cov;
    }
  out.flavor = QFIFlavor::sld;
  validate_qfi_matrix(out, "qfi_matrix_pure");
  return out;
}

CRResult cr_achievable_pure(const ComplexVector& psi,
                            const std::vector<HermitianOperator>& hs,
                            double threshold) {
  check_unit(psi);
  const int np = static_cast<int>(hs.size());
  std::vector<ComplexVector> hv;
  hv.reserve(hs.size());
  for (const auto& h : hs) {
    if (h.dim() != psi.size())
      throw ValidationError("cr_achievable_pure: dimension mismatch");
    hv.push_back(h.matrix() * psi);
  }
  CRResult out;
  out.witness = Eigen::MatrixXd::Zero(np, np);
  double worst = 0.0;
  for (int a = 0; a < np; ++a)
    for (int bb = a + 1; bb < np; ++bb) {
      // <psi|[A,B]|psi> = 2i Im(<A psi|B psi>)
      const double w = 2.0 * std::abs(hv[a].dot(hv[bb]).imag());
      out.witness(a, bb) = w;
      out.witness(bb, a) = w;
      worst = std::max(worst, w);
    }
  out.achievable = worst <= threshold;
  return out;
}

ComplexMatrix rld_effective(const DensityMatrix& rho, const HermitianOperator& h) {
  const SpectralDecomposition& es = rho.eigensystem();
  const RealVector& p = es.eigenvalues;
  if (p.minCoeff() <= rho.support_cutoff())
    throw RankError("rld_effective: density matrix is singular within the support threshold");
  const ComplexMatrix hm = to_eigenbasis(es, h);
  const auto n = p.size();
  ComplexMatrix rm(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      rm(i, j) = kI * (p(j) / p(i) - 1.0) * hm(i, j);
  ComplexMatrix r = es.eigenvectors * rm * es.eigenvectors.adjoint();

  const ComplexMatrix lhs = rho.matrix() * r;
  const ComplexMatrix rhs = kI * (h.matrix() * rho.matrix() - rho.matrix() * h.matrix());
  if (max_norm(lhs - rhs) > 1e-10 * (1.0 + max_norm(r)))
    throw ValidationError("rld_effective: defining relation violated");
  return r;
}

QFIMatrix rld_matrix(const DensityMatrix& rho,
                     const std::vector<HermitianOperator>& hs) {
  if (hs.empty()) throw ValidationError("rld_matrix: need at least one generator");
  const SpectralDecomposition& es = rho.eigensystem();
  const RealVector& p = es.eigenvalues;
  if (p.minCoeff() <= rho.support_cutoff())
    throw RankError("rld_matrix: density matrix is singular within the support threshold");
  const int np = static_cast<int>(hs.size());
  const auto n = p.size();

  ComplexMatrix rho_m = rho.matrix();
  ComplexMatrix rho_sq = rho_m * rho_m;
  RealVector pinv(n);
  for (Eigen::Index i = 0; i < n; ++i) pinv(i) = 1.0 / p(i);
  ComplexMatrix rho_inv = es.eigenvectors *
                          pinv.asDiagonal().toDenseMatrix().cast<Complex>() *
                          es.eigenvectors.adjoint();

  std::vector<ComplexMatrix> r;
  r.reserve(hs.size());
  for (const auto& h : hs) r.push_back(rld_effective(rho, h));

  QFIMatrix out;
  out.entries = ComplexMatrix::Zero(np, np);
  for (int a = 0; a < np; ++a)
    for (int bb = 0; bb < np; ++bb) {
      const ComplexMatrix& ha = hs[a].matrix();
      const ComplexMatrix& hb = hs[bb].matrix();
      const Complex j1 = (ha * rho_sq * hb * rho_inv).trace() -
                         2.0 * (hb * ha * rho_m).trace() +
                         (ha * hb * rho_m).trace();
      const Complex j2 = (rho_m * r[a] * r[bb].adjoint()).trace();
      if (std::abs(j1 - j2) > 1e-9 * (1.0 + std::abs(j1)))
        throw ValidationError("rld_matrix: trace formula disagrees with the effective operators");
      out.entries(a, bb) = j1;
    }
  out.flavor = QFIFlavor::rld;
  validate_qfi_matrix(out, "rld_matrix");
  return out;
}

}  // namespace qfikit
