#include "helpers.hpp"
#include "qhd/error.hpp"
#include "qhd/poisson.hpp"
#include "qhd/qhd_direct.hpp"

#include <doctest.h>

using namespace qhd;
using testing::kPi;
using testing::max_abs;

TEST_CASE("right side vanishes on the constant state") {
  Grid g(32);
  const EOS cp = EOS::centered_power(1, 1.0);
  const DopingProfile c = DopingProfile::uniform(g, 1.0);
  QHDRate r = qhd_rhs(HydroState(g, RealField::Ones(32), RealField::Zero(32)), QHDModel{cp, c, 0.3});
  CHECK(max_abs(r.drho) == 0.0);
  CHECK(max_abs(r.dv) < 1e-14);
}

TEST_CASE("uniform velocity is damped exponentially") {
  Grid g(32);
  const EOS zero = EOS::zero();
  const DopingProfile c = DopingProfile::uniform(g, 1.0);
  const double tau = 0.5, v0 = 0.8;
  HydroState h(g, RealField::Ones(32), RealField::Constant(32, v0));
  QHDRate r = qhd_rhs(h, QHDModel{zero, c, tau});
  CHECK(max_abs(RealField(r.dv + v0 / (tau * tau))) < 1e-13);

  for (QHDIntegrator integ : {QHDIntegrator::ERK4, QHDIntegrator::IMEXDamping}) {
    QHDRunConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 0.2;
    cfg.tau = tau;
    cfg.initial = h;
    cfg.integrator = integ;
    cfg.record_every = 50;
    Trajectory t = qhd_run(cfg);
    for (size_t i = 0; i < t.times.size(); ++i) {
      CHECK(max_abs(RealField(t.states[i].v - v0 * std::exp(-t.times[i] / (tau * tau)))) <= 1e-8);
    }
  }
}

TEST_CASE("right side agrees with the conservative momentum form") {
  Grid g(128);
  std::mt19937 rng(17);
  const EOS eos = EOS::gamma_law(2.0);
  const double tau = 0.4;
  for (int trial = 0; trial < 3; ++trial) {
    RealField rho = testing::random_density(g, rng);
    rho += 1.0 - integrate(g, rho);
    RealField v = testing::random_smooth(g, rng, 0.5);
    HydroState h(g, rho, v);
    const DopingProfile c = DopingProfile::uniform(g, 1.0);
    QHDRate r = qhd_rhs(h, QHDModel{eos, c, tau});

    // tau^2 J_t = -tau^2 (J^2/rho)_x - p_x - rho V_x + 1/2 rho ((sqrt rho)_xx / sqrt rho)_x - J
    RealField J = rho * v;
    RealField V = solve_potential(g, rho, c);
    RealField dJ = (-tau * tau * deriv(g, RealField(J * v), 1) - deriv(g, eos.p(rho), 1) -
                    rho * deriv(g, V, 1) + quantum_stress_enthalpy(g, rho) - J) /
                   (tau * tau);
    RealField drho = -deriv(g, J, 1);
    RealField dv = (dJ - v * drho) / rho;
    CHECK(max_abs(RealField(r.drho - drho)) <= 1e-8);
    CHECK(max_abs(RealField(r.dv - dv)) <= 1e-8 * std::max(1.0, max_abs(dv)));
  }
}

TEST_CASE("constant run is stationary") {
  Grid g(32);
  QHDRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 0.05;
  cfg.tau = 0.5;
  cfg.eos = EOS::centered_power(1, 1.0);
  cfg.initial = HydroState(g, RealField::Ones(32), RealField::Zero(32));
  Trajectory t = qhd_run(cfg);
  CHECK(max_abs(RealField(t.states.back().rho - 1.0)) <= 1e-12);
  CHECK(max_abs(t.states.back().v) <= 1e-12);
}

TEST_CASE("mass and energy balance on a perturbed run") {
  Grid g(64);
  QHDRunConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_final = 0.02;
  cfg.tau = 0.5;
  cfg.eos = EOS::gamma_law(2.0);
  cfg.initial = HydroState(g, g.sample([](double x) { return 1 + 0.1 * std::cos(2 * kPi * x); }),
                           RealField::Zero(64));
  cfg.record_every = 10;
  Trajectory t = qhd_run(cfg);
  const double e0 = t.records.front().energy.total();
  for (const auto& r : t.records) {
    CHECK(std::abs(r.mass - t.records.front().mass) <= 1e-12);
    CHECK(std::abs(r.energy_defect) <= 1e-6 * e0);
    CHECK(std::abs(r.v_winding) <= 1e-12);
  }
  CHECK(t.records.back().dissip_v2 > 0.0);
}

TEST_CASE("step guard and instability detection") {
  Grid g(64);
  const double dx2 = 1.0 / (64.0 * 64.0);
  CHECK(qhd_step_guard(g, 0.5, QHDIntegrator::ERK4) == doctest::Approx(0.5 * 0.25 * dx2));
  CHECK(qhd_step_guard(g, 2.0, QHDIntegrator::ERK4) == doctest::Approx(0.5 * 2.0 * dx2));
  CHECK(qhd_step_guard(g, 0.5, QHDIntegrator::IMEXDamping) == doctest::Approx(0.5 * 0.5 * dx2));

  QHDRunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 0.5;
  cfg.tau = 0.5;
  cfg.cfl = 50.0;
  cfg.initial = HydroState(g, g.sample([](double x) { return 1 + 0.1 * std::cos(2 * kPi * x); }),
                           RealField::Zero(64));
  try {
    qhd_run(cfg);
    FAIL("expected StepUnstable");
  } catch (const Error& e) {
    const bool expected = e.kind() == ErrorKind::StepUnstable || e.kind() == ErrorKind::VacuumBreach;
    CHECK(expected);
  }
}
