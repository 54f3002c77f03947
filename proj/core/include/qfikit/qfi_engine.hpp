#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

#include "qfikit/operator_core.hpp"

namespace qfikit {

using Rational = boost::multiprecision::cpp_rational;

// State with density operator exp(G0), Tr exp(G0) = 1, stored through the
// spectral decomposition of the Hermitian exponent G0.
class ExponentialState {
 public:
  explicit ExponentialState(const HermitianOperator& g0,
                            const Tolerances& tol = Tolerances::standard());

  // Shifts an arbitrary Hermitian exponent by log Tr exp(g) times identity
  // so the trace constraint holds exactly up to rounding.
  static ExponentialState from_generator(const HermitianOperator& g,
                                         const Tolerances& tol = Tolerances::standard());

  int dim() const { return generator_.dim(); }
  const HermitianOperator& generator() const { return generator_; }
  const SpectralDecomposition& eigensystem() const { return eig_; }
  DensityMatrix density() const;

 private:
  ExponentialState(HermitianOperator g0, SpectralDecomposition eig)
      : generator_(std::move(g0)), eig_(std::move(eig)) {}

  HermitianOperator generator_;
  SpectralDecomposition eig_;
};

// Coefficients of the symmetric-logarithmic-derivative commutator series for
// exponential states: L = -i sum_{even n <= order} g_n (G0^x)^{n+1} H with
// g_n = 4 (2^{n+2} - 1) B_{n+2} / (n+2)! and B_k the Bernoulli numbers
// (B_1 = -1/2 convention).  Odd g_n vanish.  The generating identity is
// sum_n g_n x^{n+1} = 2 tanh(x/2).
struct SLDCoefficients {
  int order = 0;
  std::vector<double> g;           // g_0 .. g_order
  std::vector<Rational> bernoulli; // B_2 .. B_{order+2}
};

SLDCoefficients sld_coefficients(int order);

enum class QFIFlavor { sld, rld };

struct QFIMatrix {
  ComplexMatrix entries;
  QFIFlavor flavor = QFIFlavor::sld;

  int dim_params() const { return static_cast<int>(entries.rows()); }

  // Real part of the entries; for the sld flavor the imaginary parts are
  // zero to rounding and this is the whole matrix.
  Eigen::MatrixXd real_entries() const { return entries.real(); }
};

struct CRResult {
  bool achievable = false;
  Eigen::MatrixXd witness;  // |<psi|[H_a, H_b]|psi>| per parameter pair
};

// ---- Single-parameter quantum Fisher information ---------------------------

// Spectral formula sum_i 4 p_i Var_i(H) - sum_{i!=j} 8 p_i p_j / (p_i + p_j)
// |H_ij|^2, restricted to eigenvalues above the support cutoff.
double qfi_mixed(const DensityMatrix& rho, const HermitianOperator& h);

// Dimension-2 shortcut 4 (2 Tr rho^2 - 1) Var(H) taken in an eigenstate of
// rho; asserts both eigenstate choices agree.
double qfi_qubit(const DensityMatrix& rho, const HermitianOperator& h);

double qfi_pure(const ComplexVector& psi, const HermitianOperator& h);

// 2i (H P - P H) for the projector P = |psi><psi|.
HermitianOperator sld_effective_pure(const ComplexVector& psi,
                                     const HermitianOperator& h);

// Truncated commutator series for the SLD of an exponential state.  Throws
// ConvergenceError when the even-order term norms grow over the last three
// terms; the closed form below has no such restriction.
HermitianOperator sld_effective_exponential(const ExponentialState& state,
                                            const HermitianOperator& h,
                                            int order = 30);

// Closed form: in the eigenbasis of G0, L_ij = -2i tanh((a_i - a_j)/2) H_ij.
HermitianOperator sld_effective_exponential_tanh(const ExponentialState& state,
                                                 const HermitianOperator& h);

// sum_{i>j} 4 (e^{a_i} + e^{a_j}) tanh^2((a_i - a_j)/2) |H_ij|^2.
double qfi_exponential(const ExponentialState& state, const HermitianOperator& h);

// ---- Multiparameter ---------------------------------------------------------

QFIMatrix qfi_matrix(const DensityMatrix& rho,
                     const std::vector<HermitianOperator>& hs);

QFIMatrix qfi_matrix_pure(const ComplexVector& psi,
                          const std::vector<HermitianOperator>& hs);

// Commutator-expectation witness for saturability of the multiparameter
// bound with a single pure-state measurement.
CRResult cr_achievable_pure(const ComplexVector& psi,
                            const std::vector<HermitianOperator>& hs,
                            double threshold = Tolerances::standard().cr_threshold);

// Right-logarithmic-derivative companion R = i (rho^{-1} H rho - H); requires
// rho full rank (RankError otherwise).
ComplexMatrix rld_effective(const DensityMatrix& rho, const HermitianOperator& h);

// J_ab = Tr(H_a rho^2 H_b rho^{-1} - 2 H_b H_a rho + H_a H_b rho), verified
// against Tr(rho R_a R_b^dag) before returning.  Hermitian, PSD, rld flavor.
QFIMatrix rld_matrix(const DensityMatrix& rho,
                     const std::vector<HermitianOperator>& hs);

}  // namespace qfikit
