#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qfikit/operator_core.hpp"

namespace qfikit {

using ParamMap = std::map<std::string, double>;

// Family of Hermitian operators H(params), evolved as U = exp(-i t H) with
// t = params.at("t").  t is evolution time, never a differentiation
// parameter: every backend differentiates H(params) at fixed t, so the
// derivative w.r.t. "t" of a time-independent family is zero by convention.
struct HamiltonianFamily {
  int dim = 0;
  ParamMap params;
  std::function<HermitianOperator(const ParamMap&)> eval;
  std::function<HermitianOperator(const ParamMap&, const std::string&)> eval_derivative;

  double time() const;  // params.at("t")
};

enum class Backend { closed_form, series, quadrature, finite_difference };

std::string to_string(Backend b);
std::optional<Backend> backend_from_string(const std::string& name);

struct GeneratorDiagnostics {
  int order = 0;         // series truncation order / quadrature node count
  double residual = 0.0; // last term norm / doubling delta / anti-Hermitian part
  bool cycle_resummed = false;
  bool warning = false;
  std::string note;
};

struct GeneratorResult {
  HermitianOperator h;
  Backend backend;
  GeneratorDiagnostics diagnostics;
};

inline constexpr int kQuadratureNodeCap = 1024;

// ---- Matrix-level kernels -------------------------------------------------
// Raw-matrix versions of the series and commutator-structure evaluators.
// They do not require Hermitian inputs, so the structured commutator cases
// can be exercised directly; the family-level wrappers below add the
// Hermitian invariants.

// i sum_n f_n H^{x n}(dH) with f_n = (it)^{n+1}/(n+1)!.  Truncates at the
// first term with max-norm below tol.  When consecutive nested commutators
// repeat with period two (C_{n} = xi C_{n-2} for a real scalar xi), the whole
// tail is summed in closed form instead of truncating.
ComplexMatrix generator_series(const ComplexMatrix& h, const ComplexMatrix& dh,
                               double t, int max_order, double tol,
                               GeneratorDiagnostics* diag = nullptr);

enum class ClosedFormCase { commuting, constant_commutator, scaled_commutator };

std::string to_string(ClosedFormCase c);

// Detects, in order: (a) [H,dH] = 0 -> -t dH; (b) [H,dH] = C with [H,C] = 0
// -> -t(dH + i t C/2); (c) [H,dH] = c dH for a real least-squares scalar c
// -> (i/c)(e^{itc} - 1) dH.  Returns nullopt when no case matches.
std::optional<ComplexMatrix> generator_closed_form(
    const ComplexMatrix& h, const ComplexMatrix& dh, double t,
    ClosedFormCase* which = nullptr, double* residual = nullptr,
    double tol = Tolerances::standard().closed_form);

// ---- Family-level backends ------------------------------------------------

GeneratorResult h_via_series(const HamiltonianFamily& fam, const std::string& param,
                             int max_order = 64,
                             double tol = Tolerances::standard().series_term);

// Gauss-Legendre quadrature of -int_0^t e^{isH} dH e^{-isH} ds, doubling the
// node count from `nodes` until successive estimates agree.
GeneratorResult h_via_quadrature(const HamiltonianFamily& fam, const std::string& param,
                                 int nodes = 16);

std::optional<GeneratorResult> h_closed_form(const HamiltonianFamily& fam,
                                             const std::string& param);

// Central difference of U^dag over the parameter, right-multiplied by U, then
// symmetrized; diagnostics carry the anti-Hermitian residual.
GeneratorResult h_via_finite_difference(const HamiltonianFamily& fam,
                                        const std::string& param,
                                        double step = Tolerances::standard().fd_step);

// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace qfikit
