#include "qhd/state.hpp"

#include "qhd/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qhd {

EOS EOS::gamma_law(double gamma) {
  if (!(gamma > 1.0)) throw Error(ErrorKind::InvalidArgument, "gamma-law EOS needs gamma > 1");
  return EOS(Family::GammaLaw, gamma, 0, 0.0);
}

EOS EOS::centered_power(int n, double m0) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "centered-power EOS needs n >= 1");
  if (!(m0 > 0.0)) throw Error(ErrorKind::InvalidArgument, "centered-power EOS needs M0 > 0");
  return EOS(Family::CenteredPower, 0.0, n, m0);
}

double EOS::f(double s) const {
  switch (family_) {
    case Family::Zero: return 0.0;
    case Family::GammaLaw: return std::pow(s, gamma_) / (gamma_ - 1.0);
    case Family::CenteredPower: return std::pow(s - m0_, 2 * power_);
  }
  return 0.0;
}

double EOS::df(double s) const {
  switch (family_) {
    case Family::Zero: return 0.0;
    case Family::GammaLaw: return gamma_ / (gamma_ - 1.0) * std::pow(s, gamma_ - 1.0);
    case Family::CenteredPower: return 2.0 * power_ * std::pow(s - m0_, 2 * power_ - 1);
  }
  return 0.0;
}

double EOS::d2f(double s) const {
  switch (family_) {
    case Family::Zero: return 0.0;
    case Family::GammaLaw: return gamma_ * std::pow(s, gamma_ - 2.0);
    case Family::CenteredPower:
      return 2.0 * power_ * (2.0 * power_ - 1.0) * std::pow(s - m0_, 2 * power_ - 2);
  }
  return 0.0;
}

HydroState::HydroState(Grid g, RealField rho_, RealField v_)
    : grid(std::move(g)), rho(std::move(rho_)), v(std::move(v_)) {
  if (rho.size() != grid.size() || v.size() != grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "hydro state fields do not match the grid size");
  }
}

WaveState::WaveState(Grid g, ComplexField psi_, double s_offset_)
    : grid(std::move(g)), psi(std::move(psi_)), s_offset(s_offset_) {
  if (psi.size() != grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "wave function does not match the grid size");
  }
}

void require_floor(const RealField& rho, double floor, const char* where) {
  const double m = rho.minCoeff();
  if (!(m >= floor && m > 0.0)) {
    throw Error(ErrorKind::VacuumBreach,
                std::string(where) + ": min density " + std::to_string(m) + " below floor " +
                    std::to_string(floor));
  }
}

PolarParts polar_decompose(const WaveState& w, double floor) {
  RealField modulus = w.psi.abs();
  require_floor(modulus.square(), floor, "polar_decompose");
  ComplexField phi = w.psi / modulus.cast<Complex>();
  ComplexField prod = phi.conjugate() * deriv(w.grid, w.psi, 1);
  return PolarParts{std::move(modulus), prod.imag(), prod.real()};
}

HydroState hydro_from_wave(const WaveState& w, double floor) {
  RealField rho = w.psi.abs2();
  require_floor(rho, floor, "hydro_from_wave");
  RealField current = (w.psi.conjugate() * deriv(w.grid, w.psi, 1)).imag();
  RealField v = current / rho;
  return HydroState(w.grid, std::move(rho), std::move(v));
}

WaveState wave_lift(const HydroState& h, double s_star, double floor, double winding_tol) {
  require_floor(h.rho, floor, "wave_lift");
  const double circulation = integrate(h.grid, h.v);
  if (std::abs(circulation) > winding_tol) {
    throw Error(ErrorKind::NonZeroWinding,
                "velocity has nonzero mean " + std::to_string(circulation));
  }
  RealField centred = h.v - circulation;
  RealField s = s_star + antideriv_zero_mean(h.grid, centred).array();
  ComplexField psi = h.rho.sqrt().cast<Complex>() *
                     s.unaryExpr([](double a) { return std::polar(1.0, a); });
  return WaveState(h.grid, std::move(psi), s_star);
}

double winding(const WaveState& w) {
  ComplexField ratio = deriv(w.grid, w.psi, 1) / w.psi;
  return integrate(w.grid, RealField(ratio.imag()));
}

PhaseField reconstruct_phase(const Grid& grid, const ComplexField& psi, double s_reference,
                             double winding_tol) {
  RealField rho = psi.abs2();
  RealField v = (psi.conjugate() * deriv(grid, psi, 1)).imag() / rho;
  const double circulation = integrate(grid, v);
  if (std::abs(circulation) > winding_tol) {
    throw Error(ErrorKind::NonZeroWinding,
                "velocity mean drifted to " + std::to_string(circulation));
  }
  RealField a = antideriv_zero_mean(grid, RealField(v - circulation));
  // psi / |psi| = exp(i (c + a)) up to round-off; average to estimate c.
  Complex acc = 0.0;
  for (int j = 0; j < grid.size(); ++j) {
    acc += psi[j] / std::sqrt(rho[j]) * std::polar(1.0, -a[j]);
  }
  const double c0 = std::arg(acc);
  const double two_pi = 2.0 * std::numbers::pi;
  const double c = c0 + two_pi * std::round((s_reference - c0) / two_pi);
  return PhaseField{c, c + a};
}

RealField chemical_potential(const HydroState& h, const EOS& eos, const RealField& potential,
                             double tau, bool rescaled, double floor) {
  require_floor(h.rho, floor, "chemical_potential");
  RealField sqrt_rho = h.rho.sqrt();
  RealField bohm = deriv(h.grid, sqrt_rho, 2) / (2.0 * sqrt_rho);
  RealField base = -bohm + eos.df(h.rho) + potential;
  if (!rescaled) return base + 0.5 * h.v.square();
  return (base + 0.5 * tau * tau * h.v.square()) / tau;
}

RealField sigma_field(const HydroState& h, double floor) {
  require_floor(h.rho, floor, "sigma_field");
  return -deriv(h.grid, h.momentum(), 1) / (2.0 * h.rho);
}

RealField quantum_stress(const Grid& grid, const RealField& rho, double zero_tol) {
  RealField rho_x = filtered_deriv(grid, rho, 1);
  RealField rho_xx = filtered_deriv(grid, rho, 2);
  const double threshold = zero_tol * rho.abs().maxCoeff();
  RealField fisher(grid.size());  // ((sqrt rho)_x)^2
  for (int j = 0; j < grid.size(); ++j) {
    fisher[j] = rho[j] > threshold ? rho_x[j] * rho_x[j] / (4.0 * rho[j]) : 0.5 * rho_xx[j];
  }
  return 0.25 * filtered_deriv(grid, rho, 3) - filtered_deriv(grid, fisher, 1);
}

RealField quantum_stress_enthalpy(const Grid& grid, const RealField& rho, double floor) {
  require_floor(rho, floor, "quantum_stress_enthalpy");
  RealField sqrt_rho = rho.sqrt();
  RealField enthalpy = filtered_deriv(grid, sqrt_rho, 2) / sqrt_rho;
  return 0.5 * rho * filtered_deriv(grid, enthalpy, 1);
}

RescaledState rescale_state(const HydroState& h, double tau, RescaleDirection direction) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  if (direction == RescaleDirection::Forward) {
    return RescaledState{HydroState(h.grid, h.rho, h.v / tau), tau};
  }
  return RescaledState{HydroState(h.grid, h.rho, h.v * tau), 1.0 / tau};
}

}  // namespace qhd
