#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "qfikit/h_operator.hpp"
#include "qfikit/operator_core.hpp"
#include "qfikit/qfi_engine.hpp"

namespace qfikit::spin {

// Angular-momentum matrices in the (2j+1)-dimensional representation, basis
// ordered m = j .. -j so Jz = diag(j, ..., -j).
struct SpinOperators {
  HermitianOperator jx;
  HermitianOperator jy;
  HermitianOperator jz;
  double j = 0.5;
  int dim = 2;
};

SpinOperators collective_spin_operators(double j);

// n . J for a real 3-vector n (not necessarily unit).
HermitianOperator spin_along(const SpinOperators& ops, const Eigen::Vector3d& n);

struct SpinParams {
  double j = 0.5;
  double B = 0.0;      // field amplitude, hbar = 1
  double theta = 0.0;  // field angle in the x-z plane, radians
  double t = 0.0;      // evolution time
};

// Geometry of the field axis and of the generator for theta-estimation.
// n1 (and with it n2 = n0 x n1) is undefined when sin(Bt/2) = 0; mu is the
// sign of sin(Bt/2).
struct DirectionVectors {
  Eigen::Vector3d n0;
  Eigen::Vector3d n0_prime;
  int mu = 0;
  std::optional<Eigen::Vector3d> n1;
  std::optional<Eigen::Vector3d> n2;
};

DirectionVectors direction_vectors(const SpinParams& p);

// H(B, theta) = B (cos(theta) Jx + sin(theta) Jz) with parameters B, theta, t.
HamiltonianFamily spin_hamiltonian_family(const SpinParams& p);

// Generator for theta: [cos(Bt) - 1] Jy - sin(Bt) J_{n0'}, equivalently
// 2 |sin(Bt/2)| J_{n1}; both forms are evaluated and cross-checked.
HermitianOperator h_analytic_theta(const SpinParams& p);

// Generator for B: -t J_{n0} (field direction is parameter-independent).
HermitianOperator h_analytic_B(const SpinParams& p);

// Qubit closed forms, valid for j = 1/2.  r_in is the initial Bloch vector,
// r_e the unit Bloch vector of one of its eigenstates (r_in normalized).
double qfi_theta_qubit(const BlochVector& r_in, const BlochVector& r_e,
                       const SpinParams& p);
double qfi_B_qubit(const BlochVector& r_in, const BlochVector& r_e,
                   const SpinParams& p);

struct ThermalQubit {
  DensityMatrix rho;
  ExponentialState state;
  double beta = 0.0;
};

// rho = exp(-beta sigma_z) / (2 cosh beta), both as a density matrix and as
// the exponential-form state with exponent -beta sigma_z - ln(2 cosh beta).
ThermalQubit thermal_qubit(double beta);

// 4 tanh^2(beta) sin^2(Bt/2) [1 - cos^2(theta) cos^2(Bt/2)].
double qfi_thermal(double beta, const SpinParams& p);

// 2x2 Fisher matrix for joint (B, theta) estimation from a pure qubit state.
QFIMatrix qfi_matrix_qubit_Btheta(const BlochVector& r_in, const SpinParams& p);

// Great circle of optimal pure states: all unit Bloch vectors orthogonal to
// the ring axis reach the maximum Fisher information for the parameter.
struct OptimalRing {
  std::string param;
  Eigen::Vector3d axis;
  std::vector<BlochVector> points;
  std::vector<double> qfi;  // achieved value at each point
  double qfi_max = 0.0;
};

OptimalRing optimal_state_ring(const SpinParams& p, const std::string& param,
                               int samples = 32);

}  // namespace qfikit::spin
