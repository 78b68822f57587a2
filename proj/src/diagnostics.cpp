#include "qhd/diagnostics.hpp"

#include "qhd/error.hpp"
#include "qhd/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace qhd {

EnergyComponents energy(const HydroState& h, const EOS& eos, const RealField& potential, double tau,
                        bool rescaled) {
  const Grid& g = h.grid;
  const double weight = rescaled ? tau * tau : 1.0;
  EnergyComponents e;
  e.kinetic = 0.5 * weight * integrate(g, RealField(h.rho * h.v.square()));
  e.quantum = 0.5 * fisher_information(g, h.rho);
  e.internal = integrate(g, eos.f(h.rho));
  e.electric = electric_energy(g, potential);
  return e;
}

double gcp_functional(const HydroState& h, const EOS& eos, const RealField& potential, double tau,
                      bool rescaled, double floor) {
  RealField mu = chemical_potential(h, eos, potential, tau, rescaled, floor);
  RealField sigma = sigma_field(h, floor);
  const double weight = rescaled ? tau * tau : 1.0;
  return 0.5 * weight * integrate(h.grid, RealField(h.rho * (mu.square() + sigma.square())));
}

double entropy(const Grid& grid, const RealField& rho) {
  require_floor(rho, 0.0, "entropy");
  const double m0 = integrate(grid, rho);
  // Integrand rho log(rho/M0) - rho + M0 has the same integral and is pointwise nonnegative.
  RealField d = rho / m0 - 1.0;
  RealField g = (1.0 + d) * d.log1p() - d;
  return m0 * integrate(grid, g);
}

double relative_entropy(const Grid& grid, const RealField& rho, const RealField& rho_bar,
                        double floor, double mass_tol) {
  require_floor(rho, floor, "relative_entropy");
  require_floor(rho_bar, floor, "relative_entropy");
  const double m = integrate(grid, rho);
  const double m_bar = integrate(grid, rho_bar);
  if (std::abs(m - m_bar) > mass_tol) {
    throw Error(ErrorKind::MassMismatch,
                "densities carry masses " + std::to_string(m) + " and " + std::to_string(m_bar));
  }
  // g(a) - g(b) - g'(b)(a - b) with g(s) = s log(s/M0) reduces to a log(a/b) - a + b.
  RealField integrand = rho * (rho / rho_bar).log() - rho + rho_bar;
  return integrate(grid, integrand);
}

double default_c1(double e0, double m0) { return 1e-2 / (1.0 + e0 + m0); }

double lyapunov_F(const HydroState& h, const EOS& eos, const RealField& potential, double tau,
                  double c1) {
  return entropy(h.grid, h.rho) + energy(h, eos, potential, tau, true).total() +
         c1 * gcp_functional(h, eos, potential, tau, true);
}

double fisher_information(const Grid& grid, const RealField& rho) {
  return integrate(grid, RealField(deriv(grid, RealField(rho.sqrt()), 1).square()));
}

EntropyDissipation entropy_dissipation(const Grid& grid, const RealField& rho) {
  require_floor(rho, 0.0, "entropy_dissipation");
  RealField log_sqrt = 0.5 * rho.log();
  RealField quarter = rho.pow(0.25);
  EntropyDissipation d;
  d.weighted_log_h2 = integrate(grid, RealField(rho * deriv(grid, log_sqrt, 2).square()));
  d.sqrt_h2 = integrate(grid, RealField(deriv(grid, RealField(rho.sqrt()), 2).square()));
  d.quarter_pow4 = integrate(grid, RealField(deriv(grid, quarter, 1).pow(4)));
  return d;
}

double h2_identity_defect(const Grid& grid, const RealField& rho) {
  const EntropyDissipation d = entropy_dissipation(grid, rho);
  return d.weighted_log_h2 - d.sqrt_h2 - 16.0 / 3.0 * d.quarter_pow4;
}

double log_sobolev_slack(const Grid& grid, const RealField& rho) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return fisher_information(grid, rho) / (2.0 * pi2) - entropy(grid, rho);
}

DissipationRates dissipation_rates(const HydroState& h, double tau, bool rescaled) {
  const Grid& g = h.grid;
  RealField sigma = sigma_field(h);
  RealField rv2 = h.rho * h.v.square();
  DissipationRates r;
  r.v2 = integrate(g, rv2) / (rescaled ? 1.0 : tau);
  r.sigma2 = integrate(g, RealField(h.rho * sigma.square()));
  r.v4 = integrate(g, RealField(rv2 * h.v.square()));
  return r;
}

DiagnosticsRecord evaluate_record(double t, const HydroState& h, const EOS& eos,
                                  const DopingProfile& doping, double tau, bool rescaled, double c1,
                                  double floor) {
  const Grid& g = h.grid;
  DiagnosticsRecord rec;
  rec.t = t;
  rec.mass = h.mass();

  RealField potential = solve_potential(g, h.rho, doping);
  rec.energy = energy(h, eos, potential, tau, rescaled);

  RealField mu = chemical_potential(h, eos, potential, tau, rescaled, floor);
  RealField sigma = sigma_field(h, floor);
  const double weight = rescaled ? tau * tau : 1.0;
  rec.gcp = 0.5 * weight * integrate(g, RealField(h.rho * (mu.square() + sigma.square())));
  rec.entropy = entropy(g, h.rho);
  rec.f_tau = rec.entropy + rec.energy.total() + c1 * rec.gcp;
  rec.v_winding = integrate(g, h.v);
  rec.rates = dissipation_rates(h, tau, rescaled);

  // Time derivatives follow from the continuity and Poisson equations.
  RealField drho = -deriv(g, h.momentum(), 1);
  RealField dp = eos.dp(h.rho) * drho;
  RealField dpot = solve_poisson(g, drho);
  const double source = integrate(g, RealField(mu * dp)) + integrate(g, RealField(h.rho * mu * dpot)) -
                        integrate(g, RealField(h.rho * h.v.square() * mu));
  const double sigma_damp = integrate(g, RealField(h.rho * sigma.square()));
  rec.gcp_rhs = rescaled ? -sigma_damp + tau * source : (-sigma_damp + source) / tau;

  // Entropy inequality, always in rescaled variables.
  RealField v_r = rescaled ? RealField(h.v) : RealField(h.v / tau);
  RealField flux_r = h.rho * v_r;
  RealField drho_r = -deriv(g, flux_r, 1);
  RealField sigma_r = drho_r / (2.0 * h.rho);
  rec.entropy_bracket = rec.entropy + tau * tau * integrate(g, RealField(h.rho.log() * drho_r));
  const EntropyDissipation ed = entropy_dissipation(g, h.rho);
  RealField dsqrt = deriv(g, RealField(h.rho.sqrt()), 1);
  rec.entropy_lhs = 0.5 * ed.weighted_log_h2 +
                    4.0 * integrate(g, RealField(eos.dp(h.rho) * dsqrt.square())) +
                    integrate(g, RealField(h.rho * (h.rho - doping.c)));
  rec.entropy_rhs = 4.0 * tau * tau * integrate(g, RealField(h.rho * sigma_r.square())) +
                    std::pow(tau, 4) * integrate(g, RealField(h.rho * v_r.pow(4)));
  return rec;
}

void DissipationAccumulator::advance(const DissipationRates& r, double dt) {
  v2_ += 0.5 * dt * (last_.v2 + r.v2);
  sigma2_ += 0.5 * dt * (last_.sigma2 + r.sigma2);
  v4_ += 0.5 * dt * (last_.v4 + r.v4);
  last_ = r;
}

void DissipationAccumulator::fill(DiagnosticsRecord& rec, double e0) const {
  rec.dissip_v2 = v2_;
  rec.dissip_sigma2 = sigma2_;
  rec.dissip_v4 = v4_;
  rec.energy_defect = rec.energy.total() + v2_ - e0;
}

namespace {

// Three-point derivative at the middle of (t0, t1, t2), exact for quadratics.
double centred_derivative(double t0, double t1, double t2, double f0, double f1, double f2) {
  const double h1 = t1 - t0;
  const double h2 = t2 - t1;
  return -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double BalanceDefects::max_abs_energy() const { return max_abs(energy); }
double BalanceDefects::max_abs_gcp() const { return max_abs(gcp_identity); }
double BalanceDefects::min_entropy_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (double x : entropy_slack) m = std::min(m, x);
  return m;
}

BalanceDefects balance_defects(const std::vector<DiagnosticsRecord>& records, double tau,
                               bool rescaled) {
  if (records.size() < 3) {
    throw Error(ErrorKind::InsufficientCadence,
                "balance defects need at least three records, got " + std::to_string(records.size()));
  }
  BalanceDefects out;
  const double e0 = records.front().energy.total();
  for (const auto& r : records) {
    out.t.push_back(r.t);
    out.energy.push_back(r.energy.total() + r.dissip_v2 - e0);
  }
  const double time_scale = rescaled ? 1.0 : tau;
  for (size_t i = 1; i + 1 < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    const auto& c = records[i + 1];
    if (!(a.t < b.t && b.t < c.t)) {
      throw Error(ErrorKind::InsufficientCadence, "record times must be strictly increasing");
    }
    out.t_interior.push_back(b.t);
    out.gcp_identity.push_back(centred_derivative(a.t, b.t, c.t, a.gcp, b.gcp, c.gcp) - b.gcp_rhs);
    const double dbracket =
        centred_derivative(time_scale * a.t, time_scale * b.t, time_scale * c.t, a.entropy_bracket,
                           b.entropy_bracket, c.entropy_bracket);
    out.entropy_slack.push_back(b.entropy_rhs - b.entropy_lhs - dbracket);
  }
  return out;
}

}  // namespace qhd
