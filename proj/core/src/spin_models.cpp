#include "qfikit/spin_models.hpp"

#include <cmath>

#include "qfikit/errors.hpp"

namespace qfikit::spin {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_spin_quantum_number(double j) {
  const double twoj = 2.0 * j;
  if (!std::isfinite(j) || twoj < 1.0 - 1e-9 ||
      std::abs(twoj - std::round(twoj)) > 1e-9)
    throw ValidationError("spin quantum number must be a positive half-integer");
}

void check_params(const SpinParams& p) {
  check_spin_quantum_number(p.j);
  if (!std::isfinite(p.B) || !std::isfinite(p.theta) || !std::isfinite(p.t))
    throw ValidationError("spin parameters must be finite");
}

void require_qubit(const SpinParams& p, const char* context) {
  if (std::abs(p.j - 0.5) > 1e-12)
    throw ValidationError(std::string(context) + ": closed form is for j = 1/2 only");
}

Eigen::Vector3d to_vec3(const BlochVector& r) { return {r.x, r.y, r.z}; }

BlochVector from_vec3(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

// Eigenstate Bloch vector must be unit and collinear with r_in.
void check_eigen_direction(const Eigen::Vector3d& rin, const Eigen::Vector3d& re) {
  if (std::abs(re.norm() - 1.0) > 1e-10)
    throw ValidationError("eigenstate Bloch vector must be unit length");
  if (rin.cross(re).norm() > 1e-10 * rin.norm())
    throw ValidationError("eigenstate Bloch vector must be collinear with the state");
}

double sin_half_Bt(const SpinParams& p) { return std::sin(p.B * p.t / 2.0); }

}  // namespace

SpinOperators collective_spin_operators(double j) {
  check_spin_quantum_number(j);
  const int dim = static_cast<int>(std::lround(2.0 * j)) + 1;

  ComplexMatrix jz = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) jz(k, k) = j - k;

  ComplexMatrix jplus = ComplexMatrix::Zero(dim, dim);
  for (int k = 1; k < dim; ++k)
    jplus(k - 1, k) = std::sqrt(double(k) * (2.0 * j + 1.0 - k));

  ComplexMatrix jx = (jplus + jplus.adjoint()) / 2.0;
  ComplexMatrix jy = (jplus - jplus.adjoint()) / (2.0 * kI);

  SpinOperators ops{HermitianOperator(jx), HermitianOperator(jy),
                    HermitianOperator(jz), j, dim};

  const ComplexMatrix comm_xy = jx * jy - jy * jx - kI * jz;
  const ComplexMatrix comm_yz = jy * jz - jz * jy - kI * jx;
  const ComplexMatrix comm_zx = jz * jx - jx * jz - kI * jy;
  if (max_norm(comm_xy) > 1e-12 || max_norm(comm_yz) > 1e-12 ||
      max_norm(comm_zx) > 1e-12)
    throw ValidationError("collective_spin_operators: commutation relations violated");
  const ComplexMatrix casimir =
      jx * jx + jy * jy + jz * jz -
      j * (j + 1.0) * ComplexMatrix::Identity(dim, dim);
  if (max_norm(casimir) > 1e-10)
    throw ValidationError("collective_spin_operators: Casimir invariant violated");
  return ops;
}

HermitianOperator spin_along(const SpinOperators& ops, const Eigen::Vector3d& n) {
  return HermitianOperator(n.x() * ops.jx.matrix() + n.y() * ops.jy.matrix() +
                           n.z() * ops.jz.matrix());
}

DirectionVectors direction_vectors(const SpinParams& p) {
  check_params(p);
  DirectionVectors d;
  d.n0 = {std::cos(p.theta), 0.0, std::sin(p.theta)};
  d.n0_prime = {-std::sin(p.theta), 0.0, std::cos(p.theta)};
  const double s = sin_half_Bt(p);
  d.mu = (s > 0.0) - (s < 0.0);
  if (d.mu != 0) {
    const double c = std::cos(p.B * p.t / 2.0);
    Eigen::Vector3d n1{c * std::sin(p.theta), -s, -c * std::cos(p.theta)};
    n1 *= double(d.mu);
    d.n1 = n1;
    d.n2 = d.n0.cross(n1);
  }
  return d;
}

HamiltonianFamily spin_hamiltonian_family(const SpinParams& p) {
  check_params(p);
  const SpinOperators ops = collective_spin_operators(p.j);

  HamiltonianFamily fam;
  fam.dim = ops.dim;
  fam.params = {{"B", p.B}, {"theta", p.theta}, {"t", p.t}};
  fam.eval = [ops](const ParamMap& m) {
    const double b = m.at("B");
    const double th = m.at("theta");
    return HermitianOperator(b * (std::cos(th) * ops.jx.matrix() +
                                  std::sin(th) * ops.jz.matrix()));
  };
  fam.eval_derivative = [ops](const ParamMap& m, const std::string& param) {
    const double b = m.at("B");
    const double th = m.at("theta");
    const int dim = ops.dim;
    if (param == "theta")
      return HermitianOperator(b * (-std::sin(th) * ops.jx.matrix() +
                                    std::cos(th) * ops.jz.matrix()));
    if (param == "B")
      return HermitianOperator(std::cos(th) * ops.jx.matrix() +
                               std::sin(th) * ops.jz.matrix());
    if (param == "t")
      return HermitianOperator(ComplexMatrix::Zero(dim, dim));
    throw ValidationError("spin_hamiltonian_family: unknown parameter '" + param + "'");
  };
  return fam;
}

HermitianOperator h_analytic_theta(const SpinParams& p) {
  check_params(p);
  const SpinOperators ops = collective_spin_operators(p.j);
  const DirectionVectors d = direction_vectors(p);
  const double bt = p.B * p.t;

  ComplexMatrix closed = (std::cos(bt) - 1.0) * ops.jy.matrix() -
                         std::sin(bt) * spin_along(ops, d.n0_prime).matrix();
  if (d.mu != 0) {
    const ComplexMatrix axis_form =
        2.0 * std::abs(sin_half_Bt(p)) * spin_along(ops, *d.n1).matrix();
    if (max_norm(axis_form - closed) > 1e-12 * (1.0 + max_norm(closed)))
      throw ValidationError("h_analytic_theta: the two closed forms disagree");
  }
  return HermitianOperator(closed);
}

HermitianOperator h_analytic_B(const SpinParams& p) {
  check_params(p);
  const SpinOperators ops = collective_spin_operators(p.j);
  const DirectionVectors d = direction_vectors(p);
  return HermitianOperator(-p.t * spin_along(ops, d.n0).matrix());
}

double qfi_theta_qubit(const BlochVector& r_in, const BlochVector& r_e,
                       const SpinParams& p) {
  check_params(p);
  require_qubit(p, "qfi_theta_qubit");
  const Eigen::Vector3d rin = to_vec3(r_in);
  if (rin.norm() > 1.0 + 1e-12)
    throw ValidationError("qfi_theta_qubit: Bloch vector longer than 1");
  if (rin.norm() < 1e-15) return 0.0;
  check_eigen_direction(rin, to_vec3(r_e));

  const DirectionVectors d = direction_vectors(p);
  if (d.mu == 0) return 0.0;
  const double s = sin_half_Bt(p);
  const double proj = d.n1->dot(to_vec3(r_e));
  const double bracket = std::max(0.0, 1.0 - proj * proj);
  return 4.0 * s * s * rin.squaredNorm() * bracket;
}

double qfi_B_qubit(const BlochVector& r_in, const BlochVector& r_e,
                   const SpinParams& p) {
  check_params(p);
  require_qubit(p, "qfi_B_qubit");
  const Eigen::Vector3d rin = to_vec3(r_in);
  if (rin.norm() > 1.0 + 1e-12)
    throw ValidationError("qfi_B_qubit: Bloch vector longer than 1");
  if (rin.norm() < 1e-15) return 0.0;
  check_eigen_direction(rin, to_vec3(r_e));

  const DirectionVectors d = direction_vectors(p);
  const double proj = d.n0.dot(to_vec3(r_e));
  const double bracket = std::max(0.0, 1.0 - proj * proj);
  return p.t * p.t * rin.squaredNorm() * bracket;
}

ThermalQubit thermal_qubit(double beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw ValidationError("thermal_qubit: beta must be finite and >= 0");
  const double log_z = std::log(2.0 * std::cosh(beta));
  ComplexMatrix g0 = ComplexMatrix::Zero(2, 2);
  g0(0, 0) = -beta - log_z;
  g0(1, 1) = beta - log_z;
  const double trace = std::exp(g0(0, 0).real()) + std::exp(g0(1, 1).real());
  if (std::abs(trace - 1.0) > 1e-12)
    throw ValidationError("thermal_qubit: trace normalization failed");

  ComplexMatrix rho = ComplexMatrix::Zero(2, 2);
  rho(0, 0) = std::exp(g0(0, 0).real());
  rho(1, 1) = 1.0 - rho(0, 0).real();  // exact unit trace
  return ThermalQubit{DensityMatrix(HermitianOperator(rho)),
                      ExponentialState(HermitianOperator(g0)), beta};
}

double qfi_thermal(double beta, const SpinParams& p) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw ValidationError("qfi_thermal: beta must be finite and >= 0");
  check_params(p);
  require_qubit(p, "qfi_thermal");
  const double th = std::tanh(beta);
  const double s = sin_half_Bt(p);
  const double c = std::cos(p.B * p.t / 2.0);
  const double ct = std::cos(p.theta);
  return 4.0 * th * th * s * s * (1.0 - ct * ct * c * c);
}

QFIMatrix qfi_matrix_qubit_Btheta(const BlochVector& r_in, const SpinParams& p) {
  check_params(p);
  require_qubit(p, "qfi_matrix_qubit_Btheta");
  const Eigen::Vector3d rin = to_vec3(r_in);
  if (std::abs(rin.norm() - 1.0) > 1e-10)
    throw ValidationError("qfi_matrix_qubit_Btheta: closed forms require a pure state");

  const DirectionVectors d = direction_vectors(p);
  const double a = d.n0.dot(rin);
  const double f_bb = p.t * p.t * std::max(0.0, 1.0 - a * a);
  double f_tt = 0.0, f_bt = 0.0;
  if (d.mu != 0) {
    const double s = std::abs(sin_half_Bt(p));
    const double b = d.n1->dot(rin);
    f_tt = 4.0 * s * s * std::max(0.0, 1.0 - b * b);
    f_bt = 2.0 * p.t * s * a * b;
  }

  QFIMatrix out;
  out.flavor = QFIFlavor::sld;
  out.entries = ComplexMatrix::Zero(2, 2);
  out.entries(0, 0) = f_bb;
  out.entries(1, 1) = f_tt;
  out.entries(0, 1) = f_bt;
  out.entries(1, 0) = f_bt;
  return out;
}

OptimalRing optimal_state_ring(const SpinParams& p, const std::string& param,
                               int samples) {
  check_params(p);
  require_qubit(p, "optimal_state_ring");
  if (samples < 1) throw ValidationError("optimal_state_ring: samples must be >= 1");

  const DirectionVectors d = direction_vectors(p);
  OptimalRing ring;
  ring.param = param;
  if (param == "B") {
    ring.axis = d.n0;
    ring.qfi_max = p.t * p.t;
  } else if (param == "theta") {
    if (d.mu == 0)
      throw ValidationError(
          "optimal_state_ring: degenerate evolution, sin(Bt/2) = 0 so the "
          "generator vanishes and no state carries information about theta");
    ring.axis = *d.n1;
    const double s = sin_half_Bt(p);
    ring.qfi_max = 4.0 * s * s;
  } else {
    throw ValidationError("optimal_state_ring: param must be 'B' or 'theta'");
  }

  // Deterministic in-plane frame: start from the coordinate axis least
  // aligned with the ring axis (x, then y, then z on ties).
  int least = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(ring.axis(i)) < std::abs(ring.axis(least)) - 1e-15) least = i;
  Eigen::Vector3d seed = Eigen::Vector3d::Zero();
  seed(least) = 1.0;
  const Eigen::Vector3d e1 = (seed - ring.axis.dot(seed) * ring.axis).normalized();
  const Eigen::Vector3d e2 = ring.axis.cross(e1);

  ring.points.reserve(samples);
  ring.qfi.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    const double phi = 2.0 * M_PI * k / samples;
    const Eigen::Vector3d r = std::cos(phi) * e1 + std::sin(phi) * e2;
    if (std::abs(ring.axis.dot(r)) > 1e-12)
      throw ValidationError("optimal_state_ring: sample not orthogonal to the axis");
    const BlochVector rb = from_vec3(r);
    const double f = (param == "B") ? qfi_B_qubit(rb, rb, p)
                                    : qfi_theta_qubit(rb, rb, p);
    if (std::abs(f - ring.qfi_max) > 1e-10 * (1.0 + ring.qfi_max))
      throw ValidationError("optimal_state_ring: sample misses the maximum");
    ring.points.push_back(rb);
    ring.qfi.push_back(f);
  }
  return ring;
}

}  // namespace qfikit::spin
