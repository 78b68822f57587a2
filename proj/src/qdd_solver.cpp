#include "qhd/qdd_solver.hpp"

#include "qhd/error.hpp"
#include "qhd/poisson.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace qhd {

RealField qdd_potential(const Grid& grid, const RealField& rho, const QDDModel& model) {
  if (!model.doping) return RealField::Zero(grid.size());
  return solve_potential(grid, rho, *model.doping);
}

namespace {

// Explicit part ((sqrt rho)_x^2 + p)_xx + (rho V_x)_x in Fourier space; zero mode vanishes.
ComplexField explicit_part_hat(const Grid& g, const RealField& rho, const QDDModel& m) {
  RealField grad = deriv(g, RealField(rho.sqrt()), 1);
  RealField pressure_like = dealias(g, RealField(grad.square() + m.eos.p(rho)));
  RealField drift = dealias(g, RealField(rho * deriv(g, qdd_potential(g, rho, m), 1)));
  const RealField& k = g.wavenumbers();
  ComplexField a = g.forward(pressure_like);
  ComplexField b = g.forward(drift);
  const int n = g.size();
  ComplexField out(n);
  for (int j = 0; j < n; ++j) {
    // Nyquist slot dropped for the odd derivative.
    const double kj = j == n / 2 ? 0.0 : k[j];
    out[j] = -k[j] * k[j] * a[j] + Complex(0.0, kj) * b[j];
  }
  out[0] = 0.0;
  return out;
}

}  // namespace

RealField qdd_step(const Grid& g, const RealField& rho, double dt, const QDDModel& m,
                   int* iterations) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "time step must be positive");
  require_floor(rho, m.floor, "qdd_step");
  const RealField& k = g.wavenumbers();
  const ComplexField rho_hat = g.forward(rho);
  RealField denom = 1.0 + 0.25 * dt * k.pow(4);

  RealField star = rho;
  for (int it = 1; it <= m.max_iter; ++it) {
    require_floor(star, m.floor, "qdd_step");
    ComplexField hat = (rho_hat + dt * explicit_part_hat(g, star, m)) / denom.cast<Complex>();
    hat[0] = rho_hat[0];
    RealField next = g.inverse_real(hat);
    const double change = (next - star).abs().maxCoeff();
    if (change <= m.tol * std::max(1.0, next.abs().maxCoeff())) {
      if (iterations) *iterations = it;
      require_floor(next, m.floor, "qdd_step");
      return next;
    }
    star = 0.5 * star + 0.5 * next;
  }
  throw Error(ErrorKind::NoConvergence,
              fmt::format("fixed point not reached in {} iterations", m.max_iter));
}

QDDTrajectory qdd_run(const QDDRunConfig& cfg) {
  if (!(cfg.dt > 0.0) || !(cfg.t_final >= 0.0) || cfg.record_every < 1) {
    throw Error(ErrorKind::InvalidArgument, "QDD run needs dt > 0 and t_final >= 0");
  }
  if (!cfg.initial) throw Error(ErrorKind::InvalidArgument, "QDD run has no initial density");
  const Grid g(static_cast<int>(cfg.initial->size()));
  RealField rho = *cfg.initial;
  require_floor(rho, cfg.model.floor, "qdd_run");
  const long steps = std::lround(cfg.t_final / cfg.dt);

  QDDTrajectory traj;
  traj.grid = g;
  const double h0 = entropy(g, rho);
  double cum_sqrt = 0.0, cum_quarter = 0.0;
  EntropyDissipation last = entropy_dissipation(g, rho);

  auto store = [&](long step) {
    QDDRecord r;
    r.t = step * cfg.dt;
    r.mass = integrate(g, rho);
    r.entropy = entropy(g, rho);
    r.dissip_sqrt_h2 = cum_sqrt;
    r.dissip_quarter_pow4 = cum_quarter;
    r.entropy_inequality_slack = h0 - r.entropy - cum_sqrt - cum_quarter;
    r.h2_identity_defect = h2_identity_defect(g, rho);
    r.log_sobolev_slack = log_sobolev_slack(g, rho);
    traj.times.push_back(r.t);
    traj.densities.push_back(rho);
    traj.records.push_back(r);
  };

  store(0);
  for (long step = 1; step <= steps; ++step) {
    try {
      int iters = 0;
      rho = qdd_step(g, rho, cfg.dt, cfg.model, &iters);
      traj.max_iterations = std::max(traj.max_iterations, iters);
      EntropyDissipation d = entropy_dissipation(g, rho);
      cum_sqrt += 0.5 * cfg.dt * (last.sqrt_h2 + d.sqrt_h2);
      cum_quarter += 0.5 * cfg.dt * (last.quarter_pow4 + d.quarter_pow4);
      last = d;
      if (step % cfg.record_every == 0 || step == steps) store(step);
    } catch (const Error& e) {
      throw e.annotate(fmt::format("(t = {:.6g})", step * cfg.dt));
    }
  }
  return traj;
}

RealField constitutive_current(const Grid& g, const RealField& rho, const QDDModel& m) {
  RealField stress = quantum_stress_enthalpy(g, rho, m.floor);
  return stress - deriv(g, m.eos.p(rho), 1) - rho * deriv(g, qdd_potential(g, rho, m), 1);
}

double weak_form_residual(const QDDTrajectory& traj, const QDDModel& m, const TestFunction& eta) {
  if (traj.times.empty()) return 0.0;
  const double t_end = traj.times.back();
  if (std::abs(eta.phi(t_end)) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "test function must vanish at the final time");
  }
  const Grid& g = traj.grid;
  const RealField chi_x = deriv(g, eta.chi, 1);
  const RealField chi_xx = deriv(g, eta.chi, 2);
  const RealField chi_xxxx = deriv(g, eta.chi, 4);

  auto integrand = [&](size_t i) {
    const RealField& rho = traj.densities[i];
    const double t = traj.times[i];
    RealField grad = deriv(g, RealField(rho.sqrt()), 1);
    RealField vx = deriv(g, qdd_potential(g, rho, m), 1);
    RealField spatial = (grad.square() + m.eos.p(rho)) * chi_xx - rho * vx * chi_x -
                        0.25 * rho * chi_xxxx;
    return eta.dphi(t) * integrate(g, RealField(rho * eta.chi)) + eta.phi(t) * integrate(g, spatial);
  };

  double total = 0.0;
  double prev = integrand(0);
  for (size_t i = 1; i < traj.times.size(); ++i) {
    const double cur = integrand(i);
    total += 0.5 * (traj.times[i] - traj.times[i - 1]) * (prev + cur);
    prev = cur;
  }
  return total + eta.phi(traj.times.front()) * integrate(g, RealField(traj.densities.front() * eta.chi));
}

}  // namespace qhd
