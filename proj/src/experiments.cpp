#include "qhd/experiments.hpp"

#include "qhd/error.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

namespace qhd {

RateFit fit_rate(const std::vector<double>& taus, const std::vector<double>& errors) {
  if (taus.size() != errors.size() || taus.size() < 3) {
    throw Error(ErrorKind::InvalidArgument, "rate fit needs at least three (tau, error) pairs");
  }
  const size_t n = taus.size();
  double sx = 0, sy = 0;
  std::vector<double> lx(n), ly(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(taus[i] > 0.0) || !(errors[i] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "rate fit needs positive taus and errors");
    }
    lx[i] = std::log(taus[i]);
    ly[i] = std::log(errors[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorKind::InvalidArgument, "rate fit needs distinct taus");
  RateFit fit{taus, errors, sxy / sxx, 0.0, 0.0};
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double r = ly[i] - fit.intercept - fit.slope * lx[i];
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double tau0_heuristic(double c1, double delta) {
  return std::min({c1, std::sqrt(c1) / 4.0, std::sqrt(2.0 * c1 * delta / (8.0 + delta))});
}

void parallel_for(size_t count, int degree, const std::function<void(size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const size_t threads = std::min<size_t>(count, static_cast<size_t>(std::max(1, degree)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Table trajectory_table(const Trajectory& traj, const std::string& name, bool with_winding) {
  Table t{name,
          {"t", "mass", "E_total", "E_kinetic", "E_quantum", "E_internal", "E_electric", "I", "H",
           "dissip_v2", "dissip_sigma2", "dissip_v4", "energy_defect"},
          {}};
  if (with_winding) t.columns.push_back("v_winding");
  for (const auto& r : traj.records) {
    std::vector<double> row{r.t,           r.mass,          r.energy.total(),   r.energy.kinetic,
                            r.energy.quantum, r.energy.internal, r.energy.electric, r.gcp,
                            r.entropy,     r.dissip_v2,     r.dissip_sigma2,    r.dissip_v4,
                            r.energy_defect};
    if (with_winding) row.push_back(r.v_winding);
    t.add(std::move(row));
  }
  return t;
}

Table qdd_table(const QDDTrajectory& traj, const std::string& name) {
  Table t{name,
          {"t", "mass", "H", "dissip_sqrt_H2", "dissip_quarter_pow4", "entropy_inequality_slack"},
          {}};
  for (const auto& r : traj.records) {
    t.add({r.t, r.mass, r.entropy, r.dissip_sqrt_h2, r.dissip_quarter_pow4,
           r.entropy_inequality_slack});
  }
  return t;
}

namespace {

struct Setup {
  Grid grid;
  RealField rho0;
  double m0;
  double floor;
  EOS eos;
  std::optional<DopingProfile> doping;

  QDDModel qdd_model(const ExperimentConfig& cfg) const {
    return QDDModel{eos, doping, floor, cfg.qdd.tol, cfg.qdd.max_iter};
  }
};

Setup make_setup(const ExperimentConfig& cfg, int n) {
  Grid grid(n);
  RealField rho0 = cfg.rho0.sample(grid);
  const double m0 = integrate(grid, rho0);
  const double floor = cfg.floor_for(m0);
  require_floor(rho0, floor, "initial density");
  return Setup{grid, rho0, m0, floor, cfg.eos(), cfg.doping.build(grid, m0)};
}

const DopingProfile& require_doping(const Setup& s) {
  if (!s.doping) throw Error(ErrorKind::Config, "this solver needs a doping profile");
  return *s.doping;
}

// Velocity in the requested frame; well-prepared data carry the constitutive current.
RealField initial_velocity(const ProfileSpec& spec, const ExperimentConfig& cfg, const Setup& s,
                           double tau, bool rescaled) {
  if (spec.kind != "well_prepared") return spec.sample(s.grid);
  RealField v = constitutive_current(s.grid, s.rho0, s.qdd_model(cfg)) / s.rho0;
  return rescaled ? v : RealField(tau * v);
}

SLRunConfig sl_config(const ExperimentConfig& cfg, const Setup& s, const RealField& v, double tau,
                      bool rescaled, double dt) {
  SLRunConfig c;
  c.dt = dt;
  c.t_final = cfg.t_final;
  c.tau = tau;
  c.eos = s.eos;
  c.doping = require_doping(s);
  c.initial_hydro = HydroState(s.grid, s.rho0, v);
  c.s_star = cfg.s_star;
  c.rescaled = rescaled;
  c.record_every = cfg.record_every(dt);
  c.floor = s.floor;
  c.c1 = cfg.c1;
  if (cfg.integrator == "picard") {
    c.integrator = SLIntegrator::Picard;
  } else if (!cfg.integrator.empty() && cfg.integrator != "strang" && cfg.integrator != "erk4" &&
             cfg.integrator != "imex_damping") {
    throw Error(ErrorKind::Config, "unknown SL integrator '" + cfg.integrator + "'");
  }
  return c;
}

QHDRunConfig qhd_config(const ExperimentConfig& cfg, const Setup& s, const RealField& v, double tau,
                        double dt) {
  QHDRunConfig c;
  c.dt = dt;
  c.t_final = cfg.t_final;
  c.tau = tau;
  c.eos = s.eos;
  c.doping = require_doping(s);
  c.initial = HydroState(s.grid, s.rho0, v);
  c.record_every = cfg.record_every(dt);
  c.floor = s.floor;
  c.cfl = cfg.cfl;
  c.c1 = cfg.c1;
  if (cfg.integrator == "imex_damping") {
    c.integrator = QHDIntegrator::IMEXDamping;
  } else if (!cfg.integrator.empty() && cfg.integrator != "erk4" && cfg.integrator != "strang" &&
             cfg.integrator != "picard") {
    throw Error(ErrorKind::Config, "unknown QHD integrator '" + cfg.integrator + "'");
  }
  return c;
}

QDDRunConfig qdd_config(const ExperimentConfig& cfg, const Setup& s) {
  QDDRunConfig c;
  c.dt = cfg.qdd.dt ? *cfg.qdd.dt : cfg.dt;
  c.t_final = cfg.t_final;
  c.model = s.qdd_model(cfg);
  c.initial = s.rho0;
  c.n = s.grid.size();
  c.record_every = cfg.record_every(c.dt);
  return c;
}

double max_mass_drift(const std::vector<DiagnosticsRecord>& records) {
  double m = 0.0;
  const double m0 = records.front().mass;
  for (const auto& r : records) m = std::max(m, std::abs(r.mass - m0) / m0);
  return m;
}

double max_mass_drift(const std::vector<QDDRecord>& records) {
  double m = 0.0;
  const double m0 = records.front().mass;
  for (const auto& r : records) m = std::max(m, std::abs(r.mass - m0) / m0);
  return m;
}

constexpr double kMassTol = 1e-10;

void hydro_metrics(const Trajectory& traj, RunOutput& out) {
  const auto& first = traj.records.front();
  const auto& last = traj.records.back();
  double max_def = 0.0, max_wind = 0.0;
  for (const auto& r : traj.records) {
    max_def = std::max(max_def, std::abs(r.energy_defect));
    max_wind = std::max(max_wind, std::abs(r.v_winding));
  }
  out.metrics["mass_drift_max"] = max_mass_drift(traj.records);
  out.metrics["E0"] = first.energy.total();
  out.metrics["E_final"] = last.energy.total();
  out.metrics["I_final"] = last.gcp;
  out.metrics["H_final"] = last.entropy;
  out.metrics["F_tau_final"] = last.f_tau;
  out.metrics["energy_defect_max"] = max_def;
  out.metrics["v_winding_max"] = max_wind;
  if (traj.records.size() >= 3) {
    BalanceDefects d = balance_defects(traj.records, traj.tau, traj.rescaled);
    out.metrics["gcp_identity_defect_max"] = d.max_abs_gcp();
    out.metrics["entropy_slack_min"] = d.min_entropy_slack();
  }
  out.pass_flags["mass_conserved"] = max_mass_drift(traj.records) <= kMassTol;
  out.pass_flags["winding_preserved"] = max_wind <= 1e-6;
}

Table energy_dat(const Trajectory& traj) {
  Table t{"energy", {"t", "E_total", "energy_defect", "I", "H"}, {}};
  for (const auto& r : traj.records) t.add({r.t, r.energy.total(), r.energy_defect, r.gcp, r.entropy});
  return t;
}

// Pointwise |psi_x|^2 - (sqrt(rho)_x)^2 - Lambda^2 over all stored wave states.
double polar_audit(const std::vector<WaveState>& waves) {
  double worst = 0.0;
  for (const auto& w : waves) {
    PolarParts p = polar_decompose(w);
    RealField lhs = deriv(w.grid, w.psi, 1).abs2();
    worst = std::max(worst, (lhs - p.dx_sqrt_rho.square() - p.lambda.square()).abs().maxCoeff());
  }
  return worst;
}

bool same_times(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
  }
  return true;
}

}  // namespace

RunOutput run_simulate(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg, cfg.n);
  RunOutput out;
  out.experiment = "simulate";
  out.metrics["solver"] = cfg.solver;
  if (cfg.solver == "qdd") {
    QDDTrajectory traj = qdd_run(qdd_config(cfg, s));
    out.csv.push_back(qdd_table(traj, "trajectory"));
    Table dat{"entropy", {"t", "H", "entropy_inequality_slack"}, {}};
    double min_slack = std::numeric_limits<double>::infinity();
    double max_h2 = 0.0, min_ls = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (size_t i = 0; i < traj.records.size(); ++i) {
      const auto& r = traj.records[i];
      dat.add({r.t, r.entropy, r.entropy_inequality_slack});
      min_slack = std::min(min_slack, r.entropy_inequality_slack);
      max_h2 = std::max(max_h2, std::abs(r.h2_identity_defect));
      min_ls = std::min(min_ls, r.log_sobolev_slack);
      if (i > 0 && !(r.entropy < traj.records[i - 1].entropy)) decreasing = false;
    }
    out.dat.push_back(std::move(dat));
    const double h0 = traj.records.front().entropy;
    out.metrics["mass_drift_max"] = max_mass_drift(traj.records);
    out.metrics["H0"] = h0;
    out.metrics["H_final"] = traj.records.back().entropy;
    out.metrics["entropy_inequality_slack_min"] = min_slack;
    out.metrics["h2_identity_defect_max"] = max_h2;
    out.metrics["log_sobolev_slack_min"] = min_ls;
    out.metrics["H_strictly_decreasing"] = decreasing;
    out.metrics["fixed_point_iterations_max"] = traj.max_iterations;
    out.pass_flags["mass_conserved"] = max_mass_drift(traj.records) <= kMassTol;
    out.pass_flags["entropy_inequality"] = min_slack >= -1e-3 * h0;
    out.pass_flags["h2_identity"] = max_h2 <= 1e-8;
    out.pass_flags["log_sobolev"] = min_ls >= 0.0;
    return out;
  }
  if (cfg.solver == "qhd") {
    const RealField v = initial_velocity(cfg.v0, cfg, s, cfg.tau, true);
    Trajectory traj = qhd_run(qhd_config(cfg, s, v, cfg.tau, cfg.dt));
    out.metrics["frame"] = "rescaled";
    hydro_metrics(traj, out);
    out.csv.push_back(trajectory_table(traj, "trajectory", true));
    out.dat.push_back(energy_dat(traj));
    return out;
  }
  const RealField v = initial_velocity(cfg.v0, cfg, s, cfg.tau, cfg.rescaled);
  SLTrajectory traj = sl_run(sl_config(cfg, s, v, cfg.tau, cfg.rescaled, cfg.dt));
  out.metrics["frame"] = cfg.rescaled ? "rescaled" : "unrescaled";
  out.metrics["energy_smallness_condition"] = traj.energy_small;
  hydro_metrics(traj, out);
  out.metrics["polar_identity_defect_max"] = polar_audit(traj.waves);
  out.csv.push_back(trajectory_table(traj, "trajectory", false));
  out.dat.push_back(energy_dat(traj));
  return out;
}

RunOutput run_relaxation_sweep(const ExperimentConfig& cfg) {
  if (cfg.taus.size() < 3) throw Error(ErrorKind::Config, "sweep needs at least three taus");
  const Setup s = make_setup(cfg, cfg.n);
  const QDDRunConfig qc = qdd_config(cfg, s);

  // Task 0 is the limit reference, task i + 1 the run at taus[i].
  std::optional<QDDTrajectory> reference;
  std::vector<std::optional<SLTrajectory>> runs(cfg.taus.size());
  std::vector<std::string> failures(cfg.taus.size());
  parallel_for(cfg.taus.size() + 1, cfg.parallelism, [&](size_t task) {
    if (task == 0) {
      reference = qdd_run(qc);
      return;
    }
    const size_t i = task - 1;
    const double tau = cfg.taus[i];
    try {
      const RealField v = initial_velocity(cfg.v0, cfg, s, tau, true);
      runs[i] = sl_run(sl_config(cfg, s, v, tau, true, cfg.dt));
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  RunOutput out;
  out.experiment = "sweep";
  const Grid& g = s.grid;
  Table summary{"sweep", {"tau", "err_l2", "rel_entropy", "secondary", "mass_drift"}, {}};
  std::vector<double> fit_taus, fit_l2, fit_re;
  double mass_drift = max_mass_drift(reference->records);
  Json per_tau = Json::array();
  for (size_t i = 0; i < cfg.taus.size(); ++i) {
    const double tau = cfg.taus[i];
    Json entry{{"tau", tau}};
    if (!runs[i]) {
      entry["failed"] = failures[i];
      per_tau.push_back(entry);
      continue;
    }
    const SLTrajectory& run = *runs[i];
    if (!same_times(run.times, reference->times)) {
      throw Error(ErrorKind::Config, "sweep runs and reference must share the stored cadence");
    }
    Table series{fmt::format("sweep_tau_{}", format_number(tau)), {"t", "err_l2", "rel_entropy"}, {}};
    double err = 0.0, rel = 0.0, secondary_sq = 0.0, prev = 0.0;
    for (size_t k = 0; k < run.times.size(); ++k) {
      const RealField& rho = run.states[k].rho;
      const RealField& bar = reference->densities[k];
      const double e = l2_norm(g, RealField(rho - bar));
      const double re = relative_entropy(g, rho, bar, 0.0, 1e-8);
      RealField diff = deriv(g, RealField(0.5 * rho.log()), 2) - deriv(g, RealField(0.5 * bar.log()), 2);
      const double cur = integrate(g, RealField(rho * diff.square()));
      if (k > 0) secondary_sq += 0.5 * (run.times[k] - run.times[k - 1]) * (prev + cur);
      prev = cur;
      err = std::max(err, e);
      rel = std::max(rel, re);
      series.add({run.times[k], e, re});
    }
    const double drift = max_mass_drift(run.records);
    mass_drift = std::max(mass_drift, drift);
    summary.add({tau, err, rel, std::sqrt(secondary_sq), drift});
    out.csv.push_back(std::move(series));
    entry["err_l2"] = err;
    entry["rel_entropy"] = rel;
    entry["secondary"] = std::sqrt(secondary_sq);
    per_tau.push_back(entry);
    fit_taus.push_back(tau);
    fit_l2.push_back(err);
    fit_re.push_back(rel);
  }
  out.csv.insert(out.csv.begin(), summary);
  Table dat = summary;
  dat.name = "rate";
  out.dat.push_back(std::move(dat));
  out.csv.push_back(qdd_table(*reference, "reference"));

  out.metrics["per_tau"] = per_tau;
  out.metrics["mass_drift_max"] = mass_drift;
  out.metrics["reference_dt"] = qc.dt;
  out.pass_flags["all_runs_completed"] = fit_taus.size() == cfg.taus.size();
  out.pass_flags["mass_conserved"] = mass_drift <= kMassTol;
  if (fit_taus.size() >= 3) {
    const RateFit l2 = fit_rate(fit_taus, fit_l2);
    const RateFit re = fit_rate(fit_taus, fit_re);
    out.fitted_rate["l2"] = {{"slope", l2.slope}, {"intercept", l2.intercept}, {"residual", l2.residual}};
    out.fitted_rate["rel_entropy"] = {
        {"slope", re.slope}, {"intercept", re.intercept}, {"residual", re.residual}};
    out.metrics["slope_l2_within_0.8_1.5"] = l2.slope >= 0.8 && l2.slope <= 1.5;
    out.pass_flags["rate_l2"] = l2.slope >= 0.8;
    out.pass_flags["rate_rel_entropy"] = re.slope >= 1.6;
  } else {
    out.pass_flags["rate_l2"] = false;
    out.pass_flags["rate_rel_entropy"] = false;
  }
  return out;
}

RunOutput run_entropy_decay(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg, cfg.n);
  const double tau = cfg.tau;
  const RealField v = initial_velocity(cfg.v0, cfg, s, tau, true);
  SLTrajectory traj = sl_run(sl_config(cfg, s, v, tau, true, cfg.dt));
  const auto& recs = traj.records;

  RunOutput out;
  out.experiment = "decay";
  const bool uniform_doping = s.doping && (s.doping->c - s.m0).abs().maxCoeff() <= 1e-10;
  const bool hypotheses = s.eos.family() == EOS::Family::CenteredPower &&
                          std::abs(s.eos.m0() - s.m0) <= 1e-10 && uniform_doping;
  const double e0 = recs.front().energy.total();
  const double c1_default = cfg.c1 ? *cfg.c1 : default_c1(e0, s.m0);
  std::vector<double> scan = cfg.decay.c1;
  if (scan.empty()) {
    for (double f : {1.0, 1e-1, 1e-2, 1e-3}) scan.push_back(c1_default * f);
  }
  const bool in_regime = tau <= cfg.decay.tau_regime_max;

  // Transient ends once the fraction of [0, T] has passed and the v^2 budget has saturated.
  const double budget = recs.back().dissip_v2;
  double t_sat = recs.back().t;
  for (const auto& r : recs) {
    if (r.dissip_v2 >= 0.99 * budget) {
      t_sat = r.t;
      break;
    }
  }
  const double t_star = std::max(cfg.decay.transient_fraction * cfg.t_final, t_sat);

  auto f_of = [&](const DiagnosticsRecord& r, double c1) {
    return r.entropy + r.energy.total() + c1 * r.gcp;
  };
  std::optional<double> chosen;
  double tail_slope = 0.0;
  size_t tail_points = 0;
  Json scanned = Json::array();
  for (double c1 : scan) {
    const double f0 = f_of(recs.front(), c1);
    std::vector<double> tt, lf;
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : recs) {
      const double f = f_of(r, c1);
      if (r.t < t_star || f < cfg.decay.noise_floor * f0) continue;
      if (f > prev) monotone = false;
      prev = f;
      tt.push_back(r.t);
      lf.push_back(std::log(f));
    }
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (tt.size() >= 3) {
      double mt = 0, ml = 0;
      for (size_t i = 0; i < tt.size(); ++i) mt += tt[i], ml += lf[i];
      mt /= tt.size();
      ml /= tt.size();
      double stt = 0, stl = 0;
      for (size_t i = 0; i < tt.size(); ++i) {
        stt += (tt[i] - mt) * (tt[i] - mt);
        stl += (tt[i] - mt) * (lf[i] - ml);
      }
      slope = stl / stt;
    }
    scanned.push_back({{"c1", c1}, {"monotone", monotone}, {"tail_points", tt.size()}, {"tail_slope", slope}});
    if (!chosen && monotone && tt.size() >= 3) {
      chosen = c1;
      tail_slope = slope;
      tail_points = tt.size();
    }
  }

  Table series{"decay", {"t", "F_tau", "H", "E", "I", "dissip_v2"}, {}};
  const double c1_used = chosen ? *chosen : scan.front();
  for (const auto& r : recs) {
    series.add({r.t, f_of(r, c1_used), r.entropy, r.energy.total(), r.gcp, r.dissip_v2});
  }
  Table dat = series;
  dat.name = "decay";
  out.csv.push_back(std::move(series));
  out.dat.push_back(std::move(dat));

  out.metrics["c1_used"] = c1_used;
  out.metrics["c1_default"] = c1_default;
  out.metrics["c1_scan"] = scanned;
  out.metrics["tau"] = tau;
  out.metrics["tau0_heuristic"] = tau0_heuristic(c1_used, s.rho0.minCoeff());
  out.metrics["in_regime"] = in_regime;
  out.metrics["hypotheses_met"] = hypotheses;
  out.metrics["transient_end"] = t_star;
  out.metrics["tail_points"] = tail_points;
  out.metrics["mass_drift_max"] = max_mass_drift(recs);
  out.metrics["F_tau_initial"] = f_of(recs.front(), c1_used);
  out.metrics["F_tau_final"] = f_of(recs.back(), c1_used);
  if (!in_regime) {
    out.metrics["decay_asserted"] = false;
    out.metrics["note"] = "tau outside the small-relaxation regime; decay not asserted";
  } else {
    out.metrics["decay_asserted"] = true;
    if (!chosen) {
      out.metrics["regime_error"] = std::string(to_string(ErrorKind::NotInDecayRegime));
    }
    out.fitted_rate["tail"] = {{"slope", tail_slope}, {"points", tail_points}};
    out.pass_flags["monotone_after_transient"] = chosen.has_value();
    out.pass_flags["negative_tail_slope"] = chosen.has_value() && tail_slope < 0.0;
  }
  out.pass_flags["mass_conserved"] = max_mass_drift(recs) <= kMassTol;
  return out;
}

RunOutput run_initial_layer(const ExperimentConfig& cfg) {
  const Setup s = make_setup(cfg, cfg.n);
  const double tau = cfg.tau;
  const QDDModel model = s.qdd_model(cfg);
  ProfileSpec wp;
  wp.kind = "well_prepared";
  const RealField v_well = initial_velocity(wp, cfg, s, tau, true);
  const RealField v_ill = initial_velocity(cfg.layer.ill_v, cfg, s, tau, true);

  std::vector<std::optional<SLTrajectory>> runs(2);
  parallel_for(2, cfg.parallelism, [&](size_t i) {
    runs[i] = sl_run(sl_config(cfg, s, i == 0 ? v_well : v_ill, tau, true, cfg.dt));
  });

  auto gaps = [&](const SLTrajectory& traj) {
    std::vector<double> out;
    for (const auto& h : traj.states) {
      RealField bar = constitutive_current(s.grid, h.rho, model);
      out.push_back(l2_norm(s.grid, RealField(h.momentum() - bar)));
    }
    return out;
  };
  const std::vector<double> g_well = gaps(*runs[0]);
  const std::vector<double> g_ill = gaps(*runs[1]);
  const auto& times = runs[0]->times;

  size_t check = 0;
  for (size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - cfg.layer.t_check) < std::abs(times[check] - cfg.layer.t_check)) check = i;
  }

  RunOutput out;
  out.experiment = "layer";
  Table series{"layer", {"t", "gap_well_prepared", "gap_ill_prepared"}, {}};
  for (size_t i = 0; i < times.size(); ++i) series.add({times[i], g_well[i], g_ill[i]});
  Table dat = series;
  out.csv.push_back(std::move(series));
  out.dat.push_back(std::move(dat));

  const double well_max = *std::max_element(g_well.begin(), g_well.end());
  const double ill_ratio = g_ill[0] / g_ill[check];
  out.metrics["tau"] = tau;
  out.metrics["t_check"] = times[check];
  out.metrics["ill_gap_initial"] = g_ill[0];
  out.metrics["ill_gap_at_check"] = g_ill[check];
  out.metrics["ill_gap_reduction"] = ill_ratio;
  out.metrics["well_gap_initial"] = g_well[0];
  out.metrics["well_gap_max"] = well_max;
  out.metrics["well_gap_growth"] = g_well[0] > 0.0 ? well_max / g_well[0]
                                                   : (well_max > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  out.metrics["well_gap_max_over_ill_initial"] = g_ill[0] > 0.0 ? well_max / g_ill[0] : 0.0;
  out.metrics["mass_drift_max"] =
      std::max(max_mass_drift(runs[0]->records), max_mass_drift(runs[1]->records));
  out.pass_flags["ill_prepared_layer_collapses"] = ill_ratio >= 10.0;
  out.pass_flags["well_prepared_gap_bounded"] = well_max <= 3.0 * g_well[0];
  out.pass_flags["mass_conserved"] = out.metrics["mass_drift_max"].get<double>() <= kMassTol;
  return out;
}

RunOutput run_validate(const ExperimentConfig& cfg) {
  struct LevelResult {
    double dist_rho = 0.0, dist_v = 0.0, dist = 0.0, polar = 0.0, mass = 0.0;
  };
  std::vector<LevelResult> results(cfg.levels.size());
  parallel_for(cfg.levels.size(), cfg.parallelism, [&](size_t i) {
    const auto [n, dt] = cfg.levels[i];
    const Setup s = make_setup(cfg, n);
    const RealField v = initial_velocity(cfg.v0, cfg, s, cfg.tau, true);
    SLTrajectory a = sl_run(sl_config(cfg, s, v, cfg.tau, true, dt));
    Trajectory b = qhd_run(qhd_config(cfg, s, v, cfg.tau, dt));
    if (!same_times(a.times, b.times)) {
      throw Error(ErrorKind::Config, "validation runs must share the stored cadence");
    }
    LevelResult r;
    for (size_t k = 0; k < a.states.size(); ++k) {
      const double dr = l2_norm(s.grid, RealField(a.states[k].rho - b.states[k].rho));
      const double dv = l2_norm(s.grid, RealField(a.states[k].v - b.states[k].v));
      r.dist_rho = std::max(r.dist_rho, dr);
      r.dist_v = std::max(r.dist_v, dv);
      r.dist = std::max(r.dist, std::hypot(dr, dv));
    }
    r.polar = polar_audit(a.waves);
    r.mass = std::max(max_mass_drift(a.records), max_mass_drift(b.records));
    results[i] = r;
  });

  RunOutput out;
  out.experiment = "validate";
  Table table{"validate", {"n", "dt", "dist_rho", "dist_v", "dist", "polar_defect", "mass_drift"}, {}};
  bool monotone = true;
  double polar = 0.0, mass = 0.0;
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    table.add({static_cast<double>(cfg.levels[i].first), cfg.levels[i].second, r.dist_rho, r.dist_v,
               r.dist, r.polar, r.mass});
    if (i > 0 && !(r.dist < results[i - 1].dist)) monotone = false;
    polar = std::max(polar, r.polar);
    mass = std::max(mass, r.mass);
  }
  Table dat = table;
  out.csv.push_back(std::move(table));
  out.dat.push_back(std::move(dat));
  out.metrics["finest_distance"] = results.empty() ? 0.0 : results.back().dist;
  out.metrics["polar_identity_defect_max"] = polar;
  out.metrics["mass_drift_max"] = mass;
  out.pass_flags["finest_distance_le_1e-5"] = !results.empty() && results.back().dist <= 1e-5;
  out.pass_flags["monotone_refinement"] = monotone;
  out.pass_flags["polar_identity"] = polar <= 1e-8;
  out.pass_flags["mass_conserved"] = mass <= kMassTol;
  return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "sweep") return run_relaxation_sweep(cfg);
  if (cfg.experiment == "decay") return run_entropy_decay(cfg);
  if (cfg.experiment == "layer") return run_initial_layer(cfg);
  if (cfg.experiment == "validate") return run_validate(cfg);
  return run_simulate(cfg);
}

}  // namespace qhd
