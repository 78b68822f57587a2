#pragma once

// Direct integrator for the rescaled hydrodynamic system
//   rho_t + (rho v)_x = 0,   tau^2 v_t + tau (mu_tau)_x + v = 0.

#include "qhd/diagnostics.hpp"

#include <optional>

namespace qhd {

enum class QHDIntegrator { ERK4, IMEXDamping };

struct QHDRunConfig {
  double dt = 1e-5;  // output step in rescaled time; substepped to satisfy the guard
  double t_final = 0.5;
  double tau = 1.0;
  EOS eos = EOS::zero();
  std::optional<DopingProfile> doping;
  std::optional<HydroState> initial;  // rescaled velocity
  QHDIntegrator integrator = QHDIntegrator::ERK4;
  int record_every = 1;
  double floor = 0.0;
  double cfl = 0.5;
  std::optional<double> c1;
};

struct QHDModel {
  const EOS& eos;
  const DopingProfile& doping;
  double tau;
  double floor = 0.0;
};

struct QHDRate {
  RealField drho;
  RealField dv;
};

/// Right side of the rescaled (rho, v) system, products dealiased.
QHDRate qhd_rhs(const HydroState& h, const QHDModel& model);

/// Largest stable internal step: cfl * min(tau, tau^2) * dx^2 for erk4,
/// cfl * tau * dx^2 when the damping is integrated exactly.
double qhd_step_guard(const Grid& grid, double tau, QHDIntegrator integrator, double cfl = 0.5);

/// Advance by exactly dt using equal substeps no larger than the guard.
HydroState qhd_advance(const HydroState& h, double dt, const QHDModel& model,
                       QHDIntegrator integrator, double cfl = 0.5);

Trajectory qhd_run(const QHDRunConfig& cfg);

}  // namespace qhd
