#include "qfikit/h_operator.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "qfikit/errors.hpp"

namespace qfikit {

namespace {

constexpr Complex kI{0.0, 1.0};

double frob(const ComplexMatrix& m) { return m.norm(); }

Complex frob_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.adjoint() * b).trace();
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

// Tail resummation for a period-two commutator cycle C_{n+2} = xi C_n.
// With even/odd chains collapsing onto C_0 and C_1 the series becomes
// H = i (S C_0 + K C_1), S = sum_m (it)^{2m+1} xi^m / (2m+1)!,
// K = sum_m (it)^{2m+2} xi^m / (2m+2)!.
void cycle_sums(double t, double xi, Complex& s, Complex& k) {
  const double u = xi * t * t;
  if (std::abs(u) < 1e-4) {
    // Leading terms; next omitted term is O(u^3/7!) relative.
    s = kI * t * (1.0 - u / 6.0 + u * u / 120.0);
    k = -t * t / 2.0 * (1.0 - u / 12.0 + u * u / 360.0);
  } else if (xi > 0.0) {
    const double w = std::sqrt(xi);
    s = Complex(0.0, std::sin(t * w) / w);
    k = (std::cos(t * w) - 1.0) / xi;
  } else {
    const double w = std::sqrt(-xi);
    s = Complex(0.0, std::sinh(t * w) / w);
    k = (std::cosh(t * w) - 1.0) / xi;
  }
}

struct FamilyPoint {
  HermitianOperator h;
  HermitianOperator dh;
  double t;
};

FamilyPoint family_point(const HamiltonianFamily& fam, const std::string& param) {
  if (!fam.eval || !fam.eval_derivative)
    throw ValidationError("HamiltonianFamily: eval callbacks not set");
  if (fam.params.find(param) == fam.params.end())
    throw ValidationError("HamiltonianFamily: unknown parameter '" + param + "'");
  HermitianOperator h = fam.eval(fam.params);
  HermitianOperator dh = fam.eval_derivative(fam.params, param);
  if (h.dim() != fam.dim || dh.dim() != fam.dim)
    throw ValidationError("HamiltonianFamily: eval dimension mismatch");
  return {std::move(h), std::move(dh), fam.time()};
}

}  // namespace

double HamiltonianFamily::time() const {
  auto it = params.find("t");
  if (it == params.end())
    throw ValidationError("HamiltonianFamily: missing parameter 't'");
  return it->second;
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::closed_form: return "closed_form";
    case Backend::series: return "series";
    case Backend::quadrature: return "quadrature";
    case Backend::finite_difference: return "finite_difference";
  }
  return "unknown";
}

std::optional<Backend> backend_from_string(const std::string& name) {
  if (name == "closed_form") return Backend::closed_form;
  if (name == "series") return Backend::series;
  if (name == "quadrature") return Backend::quadrature;
  if (name == "finite_difference") return Backend::finite_difference;
  return std::nullopt;
}

std::string to_string(ClosedFormCase c) {
  switch (c) {
    case ClosedFormCase::commuting: return "commuting";
    case ClosedFormCase::constant_commutator: return "constant_commutator";
    case ClosedFormCase::scaled_commutator: return "scaled_commutator";
  }
  return "unknown";
}

ComplexMatrix generator_series(const ComplexMatrix& h, const ComplexMatrix& dh,
                               double t, int max_order, double tol,
                               GeneratorDiagnostics* diag) {
  if (h.rows() != h.cols() || dh.rows() != dh.cols() || h.rows() != dh.rows())
    throw ValidationError("generator_series: dimension mismatch");
  if (max_order < 1) throw ValidationError("generator_series: max_order < 1");

  const auto n = h.rows();
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  ComplexMatrix c_prev2, c_prev1;  // C_{k-2}, C_{k-1} for cycle detection
  ComplexMatrix c = dh;            // C_0
  Complex f = kI * t;              // f_0 = it
  const double h_frob = frob(h);
  const double cycle_tol = Tolerances::standard().cycle;

  double term_norm = 0.0;
  for (int k = 0;; ++k) {
    ComplexMatrix term = kI * f * c;
    acc += term;
    term_norm = max_norm(term);
    if (term_norm < tol) {
      if (diag) {
        diag->order = k;
        diag->residual = term_norm;
      }
      return acc;
    }
    if (k >= max_order) break;

    if (k >= 2) c_prev2.swap(c_prev1);
    c_prev1 = c;
    if (k == 1) c_prev2 = dh;  // keep C_0 once C_1 exists
    c = commutator(h, c);      // C_{k+1}

    // Period-two cycle: fit C_2 = xi C_0, confirm C_3 = xi C_1, then the
    // even/odd tails sum in closed form.
    if (k + 1 == 2) {
      const double c0n = frob(c_prev2);
      if (c0n > 0.0) {
        const Complex xi_fit = frob_inner(c_prev2, c) / (c0n * c0n);
        if (std::abs(xi_fit.imag()) <= cycle_tol * (1.0 + std::abs(xi_fit))) {
          const double xi = xi_fit.real();
          const double s2 = 2.0 * h_frob * frob(c_prev1) + std::abs(xi) * c0n;
          if (frob(c - xi * c_prev2) <= cycle_tol * s2) {
            ComplexMatrix c3 = commutator(h, c);
            const double s3 = 2.0 * h_frob * frob(c) + std::abs(xi) * frob(c_prev1);
            if (frob(c3 - xi * c_prev1) <= cycle_tol * s3) {
              Complex s, kk;
              cycle_sums(t, xi, s, kk);
              if (diag) {
                diag->order = k + 1;
                diag->residual = std::max(frob(c - xi * c_prev2),
                                          frob(c3 - xi * c_prev1));
                diag->cycle_resummed = true;
                diag->note = "period-two commutator cycle, xi = " + std::to_string(xi);
              }
              return kI * (s * c_prev2 + kk * c_prev1);
            }
          }
        }
      }
    }

    f *= kI * t / double(k + 2);  // f_{k+1}
  }

  std::ostringstream msg;
  msg << "generator_series: no convergence after " << max_order
      << " terms (last term norm " << term_norm << ")";
  throw ConvergenceError(msg.str(), term_norm);
}

std::optional<ComplexMatrix> generator_closed_form(
    const ComplexMatrix& h, const ComplexMatrix& dh, double t,
    ClosedFormCase* which, double* residual, double tol) {
  if (h.rows() != h.cols() || dh.rows() != dh.cols() || h.rows() != dh.rows())
    throw ValidationError("generator_closed_form: dimension mismatch");

  const ComplexMatrix c1 = commutator(h, dh);
  const double hn = frob(h);
  const double dhn = frob(dh);
  const double comm_scale = 2.0 * hn * dhn;

  if (frob(c1) <= tol * comm_scale) {
    if (which) *which = ClosedFormCase::commuting;
    if (residual) *residual = comm_scale > 0.0 ? frob(c1) / comm_scale : 0.0;
    return ComplexMatrix(-t * dh);
  }

  const ComplexMatrix c2 = commutator(h, c1);
  const double s2 = 2.0 * hn * frob(c1);
  if (frob(c2) <= tol * s2) {
    if (which) *which = ClosedFormCase::constant_commutator;
    if (residual) *residual = frob(c2) / s2;
    return ComplexMatrix(-t * dh - kI * (t * t / 2.0) * c1);
  }

  if (dhn > 0.0) {
    const Complex c_fit = frob_inner(dh, c1) / (dhn * dhn);
    const double c = c_fit.real();
    const double scale = frob(c1) + std::abs(c) * dhn;
    const double resid = frob(c1 - c * dh);
    if (std::abs(c_fit.imag()) <= tol * (1.0 + std::abs(c)) &&
        resid <= tol * scale && std::abs(c) * dhn > tol * comm_scale) {
      if (which) *which = ClosedFormCase::scaled_commutator;
      if (residual) *residual = resid / scale;
      const Complex factor = kI / c * (std::exp(kI * (t * c)) - 1.0);
      return ComplexMatrix(factor * dh);
    }
  }

  return std::nullopt;
}

GeneratorResult h_via_series(const HamiltonianFamily& fam, const std::string& param,
                             int max_order, double tol) {
  FamilyPoint p = family_point(fam, param);
  GeneratorDiagnostics diag;
  ComplexMatrix m = generator_series(p.h.matrix(), p.dh.matrix(), p.t,
                                     max_order, tol, &diag);
  return {HermitianOperator(m), Backend::series, std::move(diag)};
}

GeneratorResult h_via_quadrature(const HamiltonianFamily& fam, const std::string& param,
                                 int nodes) {
  if (nodes < 2) throw ValidationError("h_via_quadrature: need at least 2 nodes");
  FamilyPoint p = family_point(fam, param);
  const SpectralDecomposition es = spectral_decompose(p.h);
  const ComplexMatrix m = es.eigenvectors.adjoint() * p.dh.matrix() * es.eigenvectors;
  const auto n = m.rows();

  // In the eigenbasis of H the integrand at time s is the entrywise product
  // exp(i s (lambda_i - lambda_j)) m_ij, the same conjugation evolve_unitary
  // would produce; the basis change is hoisted out of the node loop.
  auto integral = [&](int nn) {
    std::vector<double> x, w;
    gauss_legendre(nn, x, w);
    ComplexMatrix g = ComplexMatrix::Zero(n, n);
    for (int q = 0; q < nn; ++q) {
      const double s = 0.5 * p.t * (x[q] + 1.0);
      const double ws = 0.5 * p.t * w[q];
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
          const double phase = s * (es.eigenvalues(i) - es.eigenvalues(j));
          g(i, j) += ws * std::polar(1.0, phase) * m(i, j);
        }
    }
    return ComplexMatrix(-es.eigenvectors * g * es.eigenvectors.adjoint());
  };

  const double tol = Tolerances::standard().quadrature;
  ComplexMatrix prev = integral(nodes);
  int used = nodes;
  double delta = std::numeric_limits<double>::infinity();
  while (2 * used <= kQuadratureNodeCap) {
    used *= 2;
    ComplexMatrix cur = integral(used);
    delta = max_norm(cur - prev);
    if (delta < tol) {
      GeneratorDiagnostics diag;
      diag.order = used;
      diag.residual = delta;
      return {HermitianOperator(cur), Backend::quadrature, std::move(diag)};
    }
    prev.swap(cur);
  }
  std::ostringstream msg;
  msg << "h_via_quadrature: estimates still moving at " << used
      << " nodes (delta " << delta << ")";
  throw ConvergenceError(msg.str(), delta);
}

std::optional<GeneratorResult> h_closed_form(const HamiltonianFamily& fam,
                                             const std::string& param) {
  FamilyPoint p = family_point(fam, param);
  ClosedFormCase which{};
  double resid = 0.0;
  auto m = generator_closed_form(p.h.matrix(), p.dh.matrix(), p.t, &which, &resid);
  if (!m) return std::nullopt;
  GeneratorDiagnostics diag;
  diag.residual = resid;
  diag.note = to_string(which);
  return GeneratorResult{HermitianOperator(*m), Backend::closed_form, std::move(diag)};
}

GeneratorResult h_via_finite_difference(const HamiltonianFamily& fam,
                                        const std::string& param,
                                        double step) {
  if (!(step > 0.0) || !std::isfinite(step))
    throw ValidationError("h_via_finite_difference: step must be positive");
  FamilyPoint p = family_point(fam, param);  // validates param and dims
  const double t = p.t;

  ParamMap up = fam.params, dn = fam.params;
  up[param] += step;
  dn[param] -= step;
  const ComplexMatrix u0 = evolve_unitary(fam.eval(fam.params), t);
  const ComplexMatrix up_dag = evolve_unitary(fam.eval(up), t).adjoint();
  const ComplexMatrix dn_dag = evolve_unitary(fam.eval(dn), t).adjoint();

  const ComplexMatrix x = kI * ((up_dag - dn_dag) / (2.0 * step)) * u0;
  const double resid = max_norm(x - x.adjoint()) / 2.0;
  const double xn = max_norm(x);
  const double eps = std::numeric_limits<double>::epsilon();
  const double expected = 10.0 * step * step * std::pow(std::max(1.0, xn), 3) +
                          128.0 * (1.0 + xn) * eps / step;

  GeneratorDiagnostics diag;
  diag.residual = resid;
  if (resid > expected) {
    diag.warning = true;
    diag.note = "anti-Hermitian residual above finite-difference error model";
  }
  return {HermitianOperator::symmetrized(x), Backend::finite_difference,
          std::move(diag)};
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw ValidationError("gauss_legendre: n < 1");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (x * p1 - p2) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

}  // namespace qfikit
