#include "helpers.hpp"
#include "qhd/error.hpp"
#include "qhd/poisson.hpp"
#include "qhd/state.hpp"

#include <doctest.h>

using namespace qhd;
using testing::kPi;
using testing::max_abs;

namespace {

ComplexField unimodular(const RealField& phase) {
  return phase.unaryExpr([](double a) { return std::polar(1.0, a); });
}

// Non-vanishing psi = exp(a + i b) for smooth random a, b.
ComplexField random_wave(const Grid& g, std::mt19937& rng) {
  RealField a = testing::random_smooth(g, rng, 0.3);
  RealField b = testing::random_smooth(g, rng, 1.0);
  return a.exp().cast<Complex>() * unimodular(b);
}

}  // namespace

TEST_CASE("EOS consistency") {
  for (const EOS& eos : {EOS::gamma_law(2.0), EOS::gamma_law(1.4), EOS::centered_power(1, 1.0),
                         EOS::centered_power(2, 0.7), EOS::zero()}) {
    for (double s = 0.05; s <= 3.0; s += 0.05) {
      const double scale = std::max(1.0, std::abs(eos.p(s)));
      CHECK(std::abs(eos.p(s) - (eos.df(s) * s - eos.f(s))) <= 1e-12 * scale);
      CHECK(std::abs(eos.dp(s) - s * eos.d2f(s)) <= 1e-12 * std::max(1.0, std::abs(eos.dp(s))));
      // p' is the derivative of p: central difference oracle.
      const double h = 1e-5;
      CHECK(std::abs((eos.p(s + h) - eos.p(s - h)) / (2 * h) - eos.dp(s)) <= 1e-6 * scale);
    }
  }
  CHECK(EOS::gamma_law(2.0).p(1.5) == doctest::Approx(2.25));
  CHECK(EOS::centered_power(1, 1.0).f(1.5) == doctest::Approx(0.25));
  CHECK_THROWS_AS(EOS::gamma_law(1.0), Error);
  CHECK_THROWS_AS(EOS::centered_power(0, 1.0), Error);
  CHECK_THROWS_AS(EOS::centered_power(1, 0.0), Error);
}

TEST_CASE("polar decomposition") {
  Grid g(128);
  RealField c = g.sample([](double x) { return std::cos(2 * kPi * x); });
  RealField s = g.sample([](double x) { return std::sin(2 * kPi * x); });
  PolarParts p = polar_decompose(WaveState(g, unimodular(s)));
  CHECK(max_abs(p.sqrt_rho - 1.0) < 1e-14);
  CHECK(max_abs(p.lambda - 2 * kPi * c) < 1e-11);

  ComplexField real_psi = (1.0 + 0.2 * c).cast<Complex>();
  CHECK(max_abs(polar_decompose(WaveState(g, real_psi)).lambda) < 1e-14);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    WaveState w(g, random_wave(g, rng));
    PolarParts q = polar_decompose(w);
    RealField lhs = deriv(g, w.psi, 1).abs2();
    CHECK(max_abs(lhs - q.dx_sqrt_rho.square() - q.lambda.square()) <= 1e-8);
    // dx_sqrt_rho agrees with the spectral derivative of |psi|.
    CHECK(max_abs(q.dx_sqrt_rho - deriv(g, q.sqrt_rho, 1)) <= 1e-8);
  }
  ComplexField vacuum = ComplexField::Constant(128, 1.0);
  vacuum[3] = 0.0;
  CHECK_THROWS_AS(polar_decompose(WaveState(g, vacuum)), Error);
}

TEST_CASE("hydrodynamic image and lifting") {
  Grid g(64);
  RealField c = g.sample([](double x) { return std::cos(2 * kPi * x); });
  RealField s = g.sample([](double x) { return std::sin(2 * kPi * x); });

  HydroState h0 = hydro_from_wave(WaveState(g, ComplexField::Constant(64, std::sqrt(2.0))));
  CHECK(max_abs(h0.rho - 2.0) < 1e-14);
  CHECK(max_abs(h0.v) < 1e-14);

  HydroState h1 = hydro_from_wave(WaveState(g, unimodular(s)));
  CHECK(max_abs(h1.rho - 1.0) < 1e-14);
  CHECK(max_abs(h1.v - 2 * kPi * c) < 1e-11);

  WaveState lifted = wave_lift(HydroState(g, RealField::Ones(64), 2 * kPi * c), 0.0);
  CHECK(max_abs(RealField((lifted.psi - unimodular(s)).abs())) < 1e-13);
  CHECK(lifted.s_offset == 0.0);

  const double theta = 0.7;
  WaveState const_lift = wave_lift(HydroState(g, RealField::Constant(64, 2.0), RealField::Zero(64)), theta);
  CHECK(max_abs(RealField((const_lift.psi - std::sqrt(2.0) * std::polar(1.0, theta)).abs())) < 1e-14);

  try {
    wave_lift(HydroState(g, RealField::Ones(64), RealField::Constant(64, 2 * kPi)), 0.0);
    FAIL("expected NonZeroWinding");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonZeroWinding);
  }

  std::mt19937 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    HydroState h(g, testing::random_density(g, rng), testing::random_smooth(g, rng, 2.0));
    WaveState w1 = wave_lift(h, 0.0);
    WaveState w2 = wave_lift(h, 1.3);
    HydroState back = hydro_from_wave(w1);
    CHECK(max_abs(back.rho - h.rho) < 1e-9);
    CHECK(max_abs(back.v - h.v) < 1e-9);
    // Two lifts differ by a constant phase only.
    const Complex overlap = (w1.psi.conjugate() * w2.psi).sum();
    const double corr = std::abs(overlap) / std::sqrt(w1.psi.abs2().sum() * w2.psi.abs2().sum());
    CHECK(std::abs(corr - 1.0) < 1e-9);
    // Lift of the hydrodynamic image reproduces the wave up to a global phase.
    WaveState w(g, random_wave(g, rng));
    WaveState again = wave_lift(hydro_from_wave(w), 0.0);
    const Complex o = (w.psi.conjugate() * again.psi).sum();
    CHECK(std::abs(std::abs(o) / std::sqrt(w.psi.abs2().sum() * again.psi.abs2().sum()) - 1.0) < 1e-9);
    CHECK(std::abs(winding(w)) < 1e-10);
  }
}

TEST_CASE("phase reconstruction keeps the branch near the reference") {
  Grid g(32);
  RealField s = g.sample([](double x) { return 0.3 * std::sin(2 * kPi * x); });
  const double offset = 2 * kPi * 3 + 0.4;
  ComplexField psi = unimodular(RealField(s + offset));
  PhaseField p = reconstruct_phase(g, psi, offset + 0.5);
  CHECK(p.s_offset == doctest::Approx(offset).epsilon(1e-12));
  CHECK(max_abs(p.s - (s + offset)) < 1e-12);
}

TEST_CASE("chemical potential") {
  Grid g(64);
  const EOS cp = EOS::centered_power(1, 1.0);
  HydroState flat(g, RealField::Ones(64), RealField::Zero(64));
  CHECK(max_abs(chemical_potential(flat, cp, RealField::Zero(64), 1.0, false)) < 1e-14);

  // Refinement oracle for a perturbed density with Poisson coupling.
  auto mu_on = [](int n) {
    Grid gg(n);
    RealField rho = gg.sample([](double x) { return 1 + 0.1 * std::cos(2 * kPi * x); });
    HydroState h(gg, rho, RealField::Zero(n));
    RealField V = solve_potential(gg, rho, DopingProfile::uniform(gg, 1.0));
    return chemical_potential(h, EOS::zero(), V, 1.0, false);
  };
  CHECK(max_abs(mu_on(64) - testing::restrict_to(mu_on(256), 4)) < 1e-8);

  std::mt19937 rng(3);
  HydroState h(g, testing::random_density(g, rng), testing::random_smooth(g, rng, 1.0));
  RealField V = testing::random_smooth(g, rng, 0.1);
  const EOS gl = EOS::gamma_law(2.0);
  CHECK(max_abs(chemical_potential(h, gl, V, 1.0, true) - chemical_potential(h, gl, V, 1.0, false)) < 1e-13);
  RealField vacuum = RealField::Ones(64);
  vacuum[0] = 0.0;
  CHECK_THROWS_AS(chemical_potential(HydroState(g, vacuum, RealField::Zero(64)), gl, V, 1.0, false), Error);
}

TEST_CASE("sigma field") {
  Grid g(64);
  std::mt19937 rng(1);
  HydroState still(g, testing::random_density(g, rng), RealField::Zero(64));
  CHECK(max_abs(sigma_field(still)) < 1e-14);
  RealField s = g.sample([](double x) { return std::sin(2 * kPi * x); });
  RealField c = g.sample([](double x) { return std::cos(2 * kPi * x); });
  HydroState h(g, RealField::Ones(64), s);
  CHECK(max_abs(sigma_field(h) + kPi * c) < 1e-12);
}

TEST_CASE("quantum stress") {
  Grid g(256);
  CHECK(max_abs(quantum_stress(g, RealField::Constant(256, 1.3))) < 1e-12);
  RealField c2 = g.sample([](double x) { return std::pow(std::cos(kPi * x), 2); });
  CHECK(max_abs(quantum_stress(g, c2)) <= 1e-8);

  RealField rho = g.sample([](double x) { return 1 + 0.1 * std::cos(2 * kPi * x); });
  CHECK(max_abs(quantum_stress(g, rho) - quantum_stress_enthalpy(g, rho)) <= 1e-8);
  std::mt19937 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    RealField r = testing::random_density(g, rng);
    CHECK(max_abs(quantum_stress(g, r) - quantum_stress_enthalpy(g, r)) <= 1e-8);
  }
  CHECK_THROWS_AS(quantum_stress_enthalpy(g, c2, 1e-4), Error);
}

TEST_CASE("rescaling") {
  Grid g(32);
  std::mt19937 rng(2);
  HydroState h(g, testing::random_density(g, rng), testing::random_smooth(g, rng, 1.0));
  RescaledState same = rescale_state(h, 1.0, RescaleDirection::Forward);
  CHECK(max_abs(same.state.v - h.v) == 0.0);
  CHECK(same.time_scale == 1.0);
  RescaledState half = rescale_state(h, 0.5, RescaleDirection::Forward);
  CHECK(max_abs(half.state.momentum() - 2.0 * h.momentum()) < 1e-14);
  CHECK(half.time_scale == 0.5);
  RescaledState back = rescale_state(half.state, 0.5, RescaleDirection::Inverse);
  CHECK(max_abs(back.state.v - h.v) < 1e-15);
  CHECK(back.time_scale == 2.0);
  CHECK_THROWS_AS(rescale_state(h, 0.0, RescaleDirection::Forward), Error);
}

TEST_CASE("floor checks") {
  RealField r = RealField::Constant(8, 0.5);
  CHECK_NOTHROW(require_floor(r, 0.5, "test"));
  try {
    require_floor(r, 0.6, "test");
    FAIL("expected VacuumBreach");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::VacuumBreach);
    CHECK(e.annotate("(t = 1)").detail().find("(t = 1)") != std::string::npos);
  }
}
