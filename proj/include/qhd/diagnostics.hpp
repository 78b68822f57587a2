#pragma once

// Functionals and balance-law defects evaluated on states and trajectories.

#include "qhd/state.hpp"

#include <vector>

namespace qhd {

struct EnergyComponents {
  double kinetic = 0.0;   // 1/2 rho v^2, or tau^2/2 rho v^2 in the rescaled frame
  double quantum = 0.0;   // 1/2 (sqrt(rho)_x)^2
  double internal = 0.0;  // f(rho)
  double electric = 0.0;  // 1/2 (V_x)^2

  double total() const { return kinetic + quantum + internal + electric; }
};

EnergyComponents energy(const HydroState& h, const EOS& eos, const RealField& potential, double tau,
                        bool rescaled);

/// I = integral rho/2 (mu^2 + sigma^2); rescaled: integral tau^2/2 rho (mu_tau^2 + sigma_tau^2).
double gcp_functional(const HydroState& h, const EOS& eos, const RealField& potential, double tau,
                      bool rescaled, double floor = 0.0);

/// Physical entropy integral rho log(rho / M0), M0 = integral rho.
double entropy(const Grid& grid, const RealField& rho);

/// Bregman divergence of g(s) = s log(s/M0) between two densities of equal mass.
double relative_entropy(const Grid& grid, const RealField& rho, const RealField& rho_bar,
                        double floor = 0.0, double mass_tol = 1e-8);

/// Default weight of I in F_tau: 1e-2 / (1 + E0 + M0).
double default_c1(double e0, double m0);

/// F_tau = H + E_tau + c1 I_tau (rescaled frame).
double lyapunov_F(const HydroState& h, const EOS& eos, const RealField& potential, double tau,
                  double c1);

/// Fisher-type integral of (sqrt(rho)_x)^2.
double fisher_information(const Grid& grid, const RealField& rho);

struct EntropyDissipation {
  double weighted_log_h2;  // integral rho (d_xx log sqrt rho)^2
  double sqrt_h2;          // integral (d_xx sqrt rho)^2
  double quarter_pow4;     // integral (d_x rho^(1/4))^4
};

EntropyDissipation entropy_dissipation(const Grid& grid, const RealField& rho);

/// weighted_log_h2 - sqrt_h2 - 16/3 quarter_pow4; vanishes for positive rho.
double h2_identity_defect(const Grid& grid, const RealField& rho);

/// (1/(2 pi^2)) integral (sqrt(rho)_x)^2 - H(rho); nonnegative by the log-Sobolev inequality.
double log_sobolev_slack(const Grid& grid, const RealField& rho);

struct DissipationRates {
  double v2 = 0.0;      // energy dissipation rate: (1/tau) int rho v^2, rescaled: int rho v^2
  double sigma2 = 0.0;  // int rho sigma^2
  double v4 = 0.0;      // int rho v^4
};

DissipationRates dissipation_rates(const HydroState& h, double tau, bool rescaled);

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  EnergyComponents energy;
  double gcp = 0.0;      // I
  double entropy = 0.0;  // H
  double f_tau = 0.0;    // H + E + c1 I
  double v_winding = 0.0;

  // Cumulative time integrals of the dissipation rates (filled by the solvers).
  double dissip_v2 = 0.0;
  double dissip_sigma2 = 0.0;
  double dissip_v4 = 0.0;
  double energy_defect = 0.0;

  // Instantaneous quantities used by balance_defects().
  DissipationRates rates;
  double gcp_rhs = 0.0;          // right side of the dI/dt identity (sigma damping included)
  double entropy_bracket = 0.0;  // H + tau^2 int log(rho) d_t' rho, rescaled time
  double entropy_lhs = 0.0;      // 1/2 int rho (log sqrt rho)_xx^2 + 4 int p'(sqrt rho)_x^2 + int rho (rho - C)
  double entropy_rhs = 0.0;      // 4 tau^2 int rho sigma^2 + tau^4 int rho v^4, rescaled variables
};

/// Hydrodynamic run output shared by the SL and direct QHD solvers.
struct Trajectory {
  double tau = 1.0;
  bool rescaled = false;
  std::vector<double> times;        // output-frame time stamps
  std::vector<HydroState> states;   // output-frame fields
  std::vector<DiagnosticsRecord> records;
};

/// Evaluate every functional at one state given in the frame selected by `rescaled`.
DiagnosticsRecord evaluate_record(double t, const HydroState& h, const EOS& eos,
                                  const DopingProfile& doping, double tau, bool rescaled, double c1,
                                  double floor = 0.0);

/// Accumulates the trapezoidal time integrals of the dissipation rates into records.
class DissipationAccumulator {
 public:
  void start(const DissipationRates& r) { last_ = r; }
  void advance(const DissipationRates& r, double dt);
  void fill(DiagnosticsRecord& rec, double e0) const;

 private:
  DissipationRates last_;
  double v2_ = 0.0, sigma2_ = 0.0, v4_ = 0.0;
};

struct BalanceDefects {
  std::vector<double> t;              // all record times
  std::vector<double> energy;         // E(t) + dissipation - E0
  std::vector<double> t_interior;     // record times with two neighbours
  std::vector<double> gcp_identity;   // centred dI/dt minus the identity's right side
  std::vector<double> entropy_slack;  // rhs - lhs - d/dt' bracket (>= 0 expected)

  double max_abs_energy() const;
  double max_abs_gcp() const;
  double min_entropy_slack() const;
};

/// Throws InsufficientCadence with fewer than three records.
BalanceDefects balance_defects(const std::vector<DiagnosticsRecord>& records, double tau,
                               bool rescaled);

}  // namespace qhd
