#pragma once

// Schrodinger-Langevin integrator: i psi_t + 1/2 psi_xx = (f'(|psi|^2) + S/tau + V) psi.

#include "qhd/diagnostics.hpp"

#include <optional>
#include <vector>

namespace qhd {

enum class SLIntegrator { Strang, Picard };

struct SLRunConfig {
  double dt = 1e-4;       // in the output frame (t' when rescaled)
  double t_final = 1.0;   // in the output frame
  double tau = 1.0;
  EOS eos = EOS::zero();
  std::optional<DopingProfile> doping;  // defaults to the uniform profile of the initial mass
  std::optional<WaveState> initial_wave;
  std::optional<HydroState> initial_hydro;  // lifted with s_star; v given in the output frame
  double s_star = 0.0;
  bool rescaled = false;
  int record_every = 1;
  double floor = 0.0;
  SLIntegrator integrator = SLIntegrator::Strang;
  std::optional<double> c1;  // weight of I in F_tau; default_c1(E0, M0) otherwise
};

struct SLTrajectory : Trajectory {
  std::vector<WaveState> waves;  // unrescaled wave functions at the stored times
  bool energy_small = false;     // initial energy below 1/2 (sqrt(M0) - floor/sqrt(M0))^2
};

/// Potential and phase data the step needs besides psi.
struct SLModel {
  const EOS& eos;
  const DopingProfile& doping;
  double tau;
  double floor = 0.0;
};

/// One step of size dt in unrescaled time. The phase S is carried implicitly as
/// s_offset + zero-mean antiderivative of v.
WaveState sl_step(const WaveState& w, double dt, const SLModel& model,
                  SLIntegrator integrator = SLIntegrator::Strang);

/// Full phase field S of a wave state consistent with its tracked offset.
RealField phase_field(const WaveState& w);

SLTrajectory sl_run(const SLRunConfig& cfg);

}  // namespace qhd
