#include "qhd/sl_solver.hpp"

#include "qhd/error.hpp"
#include "qhd/poisson.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace qhd {

namespace {

constexpr double kPicardTol = 1e-10;
constexpr int kPicardMaxIter = 50;

// Field-independent part f'(rho) + V of the potential. Trapezoidal iterates are not
// exactly mass-preserving, so the Picard path drops their net charge before solving.
RealField local_potential(const Grid& g, const ComplexField& psi, const SLModel& m,
                          bool neutralise = false) {
  RealField rho = psi.abs2();
  require_floor(rho, m.floor, "sl_step");
  if (neutralise) {
    RealField source = rho - m.doping.c;
    return m.eos.df(rho) + solve_poisson(g, RealField(source - mean(g, source)));
  }
  return m.eos.df(rho) + solve_potential(g, rho, m.doping);
}

// Exact flow of i psi_t = (W0 + S/tau) psi with |psi| and W0 frozen.
WaveState potential_substep(const WaveState& w, double h, const SLModel& m) {
  const Grid& g = w.grid;
  RealField w0 = local_potential(g, w.psi, m);
  PhaseField phase = reconstruct_phase(g, w.psi, w.s_offset);
  const double decay = std::exp(-h / m.tau);
  RealField s_new = phase.s * decay - w0 * m.tau * (1.0 - decay);
  RealField shift = s_new - phase.s;
  ComplexField psi = w.psi * shift.unaryExpr([](double a) { return std::polar(1.0, a); });
  return WaveState(g, dealias(g, psi), mean(g, s_new));
}

ComplexField kinetic_propagate(const Grid& g, const ComplexField& psi, double h) {
  const RealField& k = g.wavenumbers();
  ComplexField hat = g.forward(psi);
  for (int j = 0; j < g.size(); ++j) hat[j] *= std::polar(1.0, -0.5 * k[j] * k[j] * h);
  return g.inverse(hat);
}

WaveState kinetic_substep(const WaveState& w, double h) {
  ComplexField psi = kinetic_propagate(w.grid, w.psi, h);
  const double offset = reconstruct_phase(w.grid, psi, w.s_offset).s_offset;
  return WaveState(w.grid, std::move(psi), offset);
}

WaveState strang_step(const WaveState& w, double dt, const SLModel& m) {
  WaveState a = potential_substep(w, 0.5 * dt, m);
  WaveState b = kinetic_substep(a, dt);
  return potential_substep(b, 0.5 * dt, m);
}

// N(psi) = (f' + V + S/tau) psi, with S continued from the reference offset.
ComplexField nonlinearity(const Grid& g, const ComplexField& psi, double s_ref, const SLModel& m) {
  RealField w = local_potential(g, psi, m, true) + reconstruct_phase(g, psi, s_ref).s / m.tau;
  return w.cast<Complex>() * psi;
}

// Trapezoidal Duhamel fixed point psi = K psi0 - i h/2 (K N(psi0) + N(psi)).
WaveState picard_step(const WaveState& w, double dt, const SLModel& m) {
  const Grid& g = w.grid;
  const Complex half_i(0.0, 0.5 * dt);
  ComplexField base = kinetic_propagate(g, w.psi, dt) -
                      half_i * kinetic_propagate(g, nonlinearity(g, w.psi, w.s_offset, m), dt);
  ComplexField psi = kinetic_propagate(g, w.psi, dt);
  for (int it = 0; it < kPicardMaxIter; ++it) {
    ComplexField next = dealias(g, ComplexField(base - half_i * nonlinearity(g, psi, w.s_offset, m)));
    const double change = (next - psi).abs().maxCoeff();
    psi = std::move(next);
    if (change <= kPicardTol * std::max(1.0, psi.abs().maxCoeff())) {
      const double offset = reconstruct_phase(g, psi, w.s_offset).s_offset;
      return WaveState(g, std::move(psi), offset);
    }
  }
  throw Error(ErrorKind::NoConvergence,
              fmt::format("Picard iteration did not converge in {} iterations", kPicardMaxIter));
}

HydroState output_state(const WaveState& w, double tau, bool rescaled, double floor) {
  HydroState h = hydro_from_wave(w, floor);
  if (rescaled) return rescale_state(h, tau, RescaleDirection::Forward).state;
  return h;
}

}  // namespace

WaveState sl_step(const WaveState& w, double dt, const SLModel& model, SLIntegrator integrator) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  if (integrator == SLIntegrator::Picard) return picard_step(w, dt, model);
  return strang_step(w, dt, model);
}

RealField phase_field(const WaveState& w) {
  return reconstruct_phase(w.grid, w.psi, w.s_offset).s;
}

SLTrajectory sl_run(const SLRunConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_final >= 0.0) || !(cfg.tau > 0.0) || cfg.record_every < 1) {
    throw Error(ErrorKind::InvalidArgument, "SL run needs dt > 0, t_final >= 0, tau > 0");
  }
  const double tau = cfg.tau;
  WaveState w = [&] {
    if (cfg.initial_wave) return *cfg.initial_wave;
    if (!cfg.initial_hydro) throw Error(ErrorKind::InvalidArgument, "SL run has no initial state");
    HydroState h = *cfg.initial_hydro;
    if (cfg.rescaled) h = rescale_state(h, tau, RescaleDirection::Inverse).state;
    return wave_lift(h, cfg.s_star, cfg.floor);
  }();
  const Grid grid = w.grid;
  const double m0 = w.mass();
  const DopingProfile doping = cfg.doping ? *cfg.doping : DopingProfile::uniform(grid, m0);
  const SLModel model{cfg.eos, doping, tau, cfg.floor};

  const double dt_internal = cfg.rescaled ? cfg.dt / tau : cfg.dt;
  const long steps = std::lround(cfg.t_final / cfg.dt);

  SLTrajectory traj;
  traj.tau = tau;
  traj.rescaled = cfg.rescaled;

  HydroState h0 = output_state(w, tau, cfg.rescaled, cfg.floor);
  const double e_unrescaled =
      energy(hydro_from_wave(w), cfg.eos, solve_potential(grid, h0.rho, doping), tau, false).total();
  const double bound = std::sqrt(m0) - cfg.floor / std::sqrt(m0);
  traj.energy_small = e_unrescaled <= 0.5 * bound * bound;
  const double c1 = cfg.c1 ? *cfg.c1 : default_c1(e_unrescaled, m0);

  DissipationAccumulator acc;
  double e0 = 0.0;
  auto store = [&](long step, const HydroState& h) {
    const double t = step * cfg.dt;
    DiagnosticsRecord rec = evaluate_record(t, h, cfg.eos, doping, tau, cfg.rescaled, c1, cfg.floor);
    if (step == 0) e0 = rec.energy.total();
    acc.fill(rec, e0);
    traj.times.push_back(t);
    traj.states.push_back(h);
    traj.records.push_back(rec);
    traj.waves.push_back(w);
  };

  acc.start(dissipation_rates(h0, tau, cfg.rescaled));
  store(0, h0);
  for (long step = 1; step <= steps; ++step) {
    try {
      w = sl_step(w, dt_internal, model, cfg.integrator);
      HydroState h = output_state(w, tau, cfg.rescaled, cfg.floor);
      acc.advance(dissipation_rates(h, tau, cfg.rescaled), cfg.dt);
      if (step % cfg.record_every == 0 || step == steps) store(step, h);
    } catch (const Error& e) {
      throw e.annotate(fmt::format("(t = {:.6g})", step * cfg.dt));
    }
  }
  return traj;
}

}  // namespace qhd
