#include "qhd/qhd_direct.hpp"

#include "qhd/error.hpp"
#include "qhd/poisson.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace qhd {

namespace {

struct Fields {
  RealField rho;
  RealField v;
};

Fields axpy(const Fields& u, double a, const QHDRate& k) {
  return Fields{u.rho + a * k.drho, u.v + a * k.dv};
}

QHDRate rhs(const Grid& g, const Fields& u, const QHDModel& m) {
  return qhd_rhs(HydroState(g, u.rho, u.v), m);
}

Fields rk4(const Grid& g, const Fields& u, double h, const QHDModel& m) {
  QHDRate k1 = rhs(g, u, m);
  QHDRate k2 = rhs(g, axpy(u, 0.5 * h, k1), m);
  QHDRate k3 = rhs(g, axpy(u, 0.5 * h, k2), m);
  QHDRate k4 = rhs(g, axpy(u, h, k3), m);
  return Fields{u.rho + h / 6.0 * (k1.drho + 2.0 * k2.drho + 2.0 * k3.drho + k4.drho),
                u.v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv)};
}

// Lawson RK4: the linear damping -v/tau^2 is carried by the exact factor exp(-h/tau^2).
Fields lawson_rk4(const Grid& g, const Fields& u, double h, const QHDModel& m) {
  const double inv_t2 = 1.0 / (m.tau * m.tau);
  const double e1 = std::exp(-0.5 * h * inv_t2);
  const double e2 = e1 * e1;
  // Nonlinear part only: add back the damping removed from the full right side.
  auto nonlin = [&](const Fields& w) {
    QHDRate r = rhs(g, w, m);
    r.dv += inv_t2 * w.v;
    return r;
  };
  auto damp = [](const Fields& w, double e) { return Fields{w.rho, e * w.v}; };
  auto damp_rate = [](const QHDRate& r, double e) { return QHDRate{r.drho, e * r.dv}; };

  QHDRate k1 = nonlin(u);
  QHDRate k2 = nonlin(damp(axpy(u, 0.5 * h, k1), e1));
  QHDRate k3 = nonlin(axpy(damp(u, e1), 0.5 * h, k2));
  QHDRate k4 = nonlin(axpy(damp(u, e2), h, damp_rate(k3, e1)));
  QHDRate a = damp_rate(k1, e2);
  QHDRate b = damp_rate(QHDRate{k2.drho + k3.drho, k2.dv + k3.dv}, e1);
  Fields out = damp(u, e2);
  out.rho += h / 6.0 * (a.drho + 2.0 * b.drho + k4.drho);
  out.v += h / 6.0 * (a.dv + 2.0 * b.dv + k4.dv);
  return out;
}

double size_of(const RealField& rho, const RealField& v) {
  return rho.abs().maxCoeff() + v.abs().maxCoeff();
}

}  // namespace

QHDRate qhd_rhs(const HydroState& h, const QHDModel& m) {
  const Grid& g = h.grid;
  require_floor(h.rho, m.floor, "qhd_rhs");
  RealField sqrt_rho = h.rho.sqrt();
  RealField potential = solve_potential(g, h.rho, m.doping);
  // tau * mu_tau
  RealField scaled_mu = -deriv(g, sqrt_rho, 2) / (2.0 * sqrt_rho) +
                        0.5 * m.tau * m.tau * h.v.square() + m.eos.df(h.rho) + potential;
  QHDRate r;
  r.drho = -deriv(g, dealias(g, RealField(h.rho * h.v)), 1);
  r.dv = (-deriv(g, dealias(g, scaled_mu), 1) - h.v) / (m.tau * m.tau);
  return r;
}

double qhd_step_guard(const Grid& grid, double tau, QHDIntegrator integrator, double cfl) {
  const double dx2 = grid.dx() * grid.dx();
  if (integrator == QHDIntegrator::IMEXDamping) return cfl * tau * dx2;
  return cfl * std::min(tau, tau * tau) * dx2;
}

HydroState qhd_advance(const HydroState& h, double dt, const QHDModel& model,
                       QHDIntegrator integrator, double cfl) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  const Grid& g = h.grid;
  const double guard = qhd_step_guard(g, model.tau, integrator, cfl);
  const long substeps = std::max(1L, static_cast<long>(std::ceil(dt / guard - 1e-9)));
  const double sub = dt / static_cast<double>(substeps);
  Fields u{h.rho, h.v};
  for (long i = 0; i < substeps; ++i) {
    u = integrator == QHDIntegrator::ERK4 ? rk4(g, u, sub, model) : lawson_rk4(g, u, sub, model);
    if (!u.rho.allFinite() || !u.v.allFinite()) {
      throw Error(ErrorKind::StepUnstable, "non-finite field after substep");
    }
  }
  return HydroState(g, std::move(u.rho), std::move(u.v));
}

Trajectory qhd_run(const QHDRunConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_final >= 0.0) || !(cfg.tau > 0.0) || cfg.record_every < 1) {
    throw Error(ErrorKind::InvalidArgument, "QHD run needs dt > 0, t_final >= 0, tau > 0");
  }
  if (!cfg.initial) throw Error(ErrorKind::InvalidArgument, "QHD run has no initial state");
  HydroState h = *cfg.initial;
  const Grid grid = h.grid;
  require_floor(h.rho, cfg.floor, "qhd_run");
  const double m0 = h.mass();
  const DopingProfile doping = cfg.doping ? *cfg.doping : DopingProfile::uniform(grid, m0);
  const QHDModel model{cfg.eos, doping, cfg.tau, cfg.floor};
  const long steps = std::lround(cfg.t_final / cfg.dt);
  const double size0 = size_of(h.rho, h.v);

  Trajectory traj;
  traj.tau = cfg.tau;
  traj.rescaled = true;
  const double e_start =
      energy(h, cfg.eos, solve_potential(grid, h.rho, doping), cfg.tau, true).total();
  const double c1 = cfg.c1 ? *cfg.c1 : default_c1(e_start, m0);

  DissipationAccumulator acc;
  auto store = [&](long step) {
    const double t = step * cfg.dt;
    DiagnosticsRecord rec = evaluate_record(t, h, cfg.eos, doping, cfg.tau, true, c1, cfg.floor);
    acc.fill(rec, e_start);
    traj.times.push_back(t);
    traj.states.push_back(h);
    traj.records.push_back(rec);
  };
  acc.start(dissipation_rates(h, cfg.tau, true));
  store(0);
  for (long step = 1; step <= steps; ++step) {
    try {
      h = qhd_advance(h, cfg.dt, model, cfg.integrator, cfg.cfl);
      if (size_of(h.rho, h.v) > 1e6 * size0) {
        throw Error(ErrorKind::StepUnstable, "field norm grew beyond 1e6 times its initial value");
      }
      require_floor(h.rho, cfg.floor, "qhd_run");
      acc.advance(dissipation_rates(h, cfg.tau, true), cfg.dt);
      if (step % cfg.record_every == 0 || step == steps) store(step);
    } catch (const Error& e) {
      throw e.annotate(fmt::format("(t = {:.6g})", step * cfg.dt));
    }
  }
  return traj;
}

}  // namespace qhd
