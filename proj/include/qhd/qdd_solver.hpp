#pragma once

// Quantum drift-diffusion equation
//   rho_t + 1/4 rho_xxxx = ((sqrt rho)_x^2)_xx + p(rho)_xx + (rho V_x)_x,
// which reduces to the DLSS equation without pressure and field.

#include "qhd/diagnostics.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace qhd {

struct QDDModel {
  EOS eos = EOS::zero();
  std::optional<DopingProfile> doping;  // no value: field-free (V = 0)
  double floor = 0.0;
  double tol = 1e-10;
  int max_iter = 200;
};

struct QDDRunConfig {
  double dt = 1e-5;
  double t_final = 0.02;
  QDDModel model;
  std::optional<RealField> initial;
  int n = 128;
  int record_every = 1;
};

/// Potential V for the model; zero when the model is field-free.
RealField qdd_potential(const Grid& grid, const RealField& rho, const QDDModel& model);

/// One linearly implicit step; the stiff 1/4 d^4 part is inverted in Fourier space
/// and the remainder is iterated to a fixed point with damping 0.5.
RealField qdd_step(const Grid& grid, const RealField& rho, double dt, const QDDModel& model,
                   int* iterations = nullptr);

struct QDDRecord {
  double t = 0.0;
  double mass = 0.0;
  double entropy = 0.0;
  double dissip_sqrt_h2 = 0.0;        // cumulative integral of (d_xx sqrt rho)^2
  double dissip_quarter_pow4 = 0.0;   // cumulative integral of (d_x rho^(1/4))^4
  double entropy_inequality_slack = 0.0;  // H0 - H - both integrals
  double h2_identity_defect = 0.0;
  double log_sobolev_slack = 0.0;
};

struct QDDTrajectory {
  Grid grid{8};
  std::vector<double> times;
  std::vector<RealField> densities;
  std::vector<QDDRecord> records;
  int max_iterations = 0;
};

QDDTrajectory qdd_run(const QDDRunConfig& cfg);

/// J = 1/2 rho ((sqrt rho)_xx / sqrt rho)_x - p(rho)_x - rho V_x.
RealField constitutive_current(const Grid& grid, const RealField& rho, const QDDModel& model);

/// Separable test function eta(t, x) = phi(t) chi(x).
struct TestFunction {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  RealField chi;
};

/// Quadrature of the weak formulation over the stored trajectory (trapezoid in time).
/// Requires phi(T) = 0.
double weak_form_residual(const QDDTrajectory& traj, const QDDModel& model, const TestFunction& eta);

}  // namespace qhd
