#pragma once

// Physical states, equations of state, doping, and the Madelung bridge between
// wave functions and hydrodynamic fields.

#include "qhd/spectral.hpp"

namespace qhd {

/// Internal energy f and pressure p = f'(s) s - f(s) for a barotropic fluid.
class EOS {
 public:
  enum class Family { Zero, GammaLaw, CenteredPower };

  static EOS zero() { return EOS(Family::Zero, 0.0, 0, 0.0); }
  /// f(s) = s^gamma / (gamma - 1), p(s) = s^gamma; requires gamma > 1.
  static EOS gamma_law(double gamma);
  /// f(s) = (s - m0)^(2n), n >= 1.
  static EOS centered_power(int n, double m0);

  Family family() const noexcept { return family_; }
  double gamma() const noexcept { return gamma_; }
  int power() const noexcept { return power_; }
  double m0() const noexcept { return m0_; }

  double f(double s) const;
  double df(double s) const;
  double d2f(double s) const;
  double p(double s) const { return df(s) * s - f(s); }
  double dp(double s) const { return s * d2f(s); }

  RealField f(const RealField& s) const { return s.unaryExpr([this](double x) { return f(x); }); }
  RealField df(const RealField& s) const { return s.unaryExpr([this](double x) { return df(x); }); }
  RealField d2f(const RealField& s) const { return s.unaryExpr([this](double x) { return d2f(x); }); }
  RealField p(const RealField& s) const { return s.unaryExpr([this](double x) { return p(x); }); }
  RealField dp(const RealField& s) const { return s.unaryExpr([this](double x) { return dp(x); }); }

 private:
  EOS(Family family, double gamma, int power, double m0)
      : family_(family), gamma_(gamma), power_(power), m0_(m0) {}

  Family family_;
  double gamma_;
  int power_;
  double m0_;
};

/// Density rho > 0 and velocity v; J = rho v, Lambda = sqrt(rho) v.
struct HydroState {
  Grid grid;
  RealField rho;
  RealField v;

  HydroState(Grid g, RealField rho_, RealField v_);

  RealField momentum() const { return rho * v; }
  RealField lambda() const { return rho.sqrt() * v; }
  double mass() const { return integrate(grid, rho); }
};

/// Wave function psi together with the mean of its continuous phase S.
struct WaveState {
  Grid grid;
  ComplexField psi;
  double s_offset = 0.0;

  WaveState(Grid g, ComplexField psi_, double s_offset_ = 0.0);

  double mass() const { return integrate(grid, RealField(psi.abs2())); }
};

/// Background charge C(x); its integral has to match the fluid mass.
struct DopingProfile {
  RealField c;

  static DopingProfile uniform(const Grid& grid, double m0) {
    return DopingProfile{RealField::Constant(grid.size(), m0)};
  }
  double mass(const Grid& grid) const { return integrate(grid, c); }
};

/// Throws VacuumBreach unless min(rho) >= floor and min(rho) > 0.
void require_floor(const RealField& rho, double floor, const char* where);

struct PolarParts {
  RealField sqrt_rho;
  RealField lambda;       // Im(conj(phi) psi_x)
  RealField dx_sqrt_rho;  // Re(conj(phi) psi_x)
};

/// Polar factorisation psi = |psi| phi for a non-vanishing wave function.
PolarParts polar_decompose(const WaveState& w, double floor = 0.0);

/// rho = |psi|^2, v = Im(conj(psi) psi_x) / rho.
HydroState hydro_from_wave(const WaveState& w, double floor = 0.0);

/// psi = sqrt(rho) exp(i S) with S = s_star + zero-mean antiderivative of v.
/// The returned state has s_offset = s_star (the torus average of S).
WaveState wave_lift(const HydroState& h, double s_star, double floor = 0.0,
                    double winding_tol = 1e-8);

/// Winding integral of psi: integral of Im(psi_x / psi) over the torus.
double winding(const WaveState& w);

struct PhaseField {
  double s_offset;
  RealField s;
};

/// Continuous phase of a non-vanishing psi. The free additive 2*pi multiple is
/// chosen so that the mean phase is closest to `s_reference`.
PhaseField reconstruct_phase(const Grid& grid, const ComplexField& psi, double s_reference,
                             double winding_tol = 1e-6);

/// Chemical potential. Unrescaled: -sqrt(rho)_xx/(2 sqrt(rho)) + v^2/2 + f'(rho) + V.
/// Rescaled: tau^-1 (-sqrt(rho)_xx/(2 sqrt(rho)) + tau^2 v^2/2 + f'(rho) + V).
RealField chemical_potential(const HydroState& h, const EOS& eos, const RealField& potential,
                             double tau, bool rescaled, double floor = 0.0);

/// sigma = -(rho v)_x / (2 rho), the logarithmic density rate.
RealField sigma_field(const HydroState& h, double floor = 0.0);

/// Quantum stress 1/4 rho_xxx - ((sqrt rho)_x)^2_x. (sqrt rho)_x^2 is formed as
/// rho_x^2/(4 rho); at isolated zeros (rho <= zero_tol * max rho) the removable
/// singularity is replaced by its limit rho_xx / 2.
RealField quantum_stress(const Grid& grid, const RealField& rho, double zero_tol = 1e-10);

/// Enthalpy form 1/2 rho (sqrt(rho)_xx / sqrt(rho))_x; needs rho >= floor.
RealField quantum_stress_enthalpy(const Grid& grid, const RealField& rho, double floor = 0.0);

enum class RescaleDirection { Forward, Inverse };

struct RescaledState {
  HydroState state;
  /// Multiply the source time by this factor to obtain the target time.
  double time_scale;
};

/// Diffusive scaling t' = tau t, J' = J / tau (forward) and its inverse.
RescaledState rescale_state(const HydroState& h, double tau, RescaleDirection direction);

}  // namespace qhd
