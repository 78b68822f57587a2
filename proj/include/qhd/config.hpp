#pragma once

// JSON experiment configuration and the profile mini-language for initial data.

#include "qhd/qdd_solver.hpp"
#include "qhd/qhd_direct.hpp"
#include "qhd/sl_solver.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace qhd {

using Json = nlohmann::json;

struct ProfileSpec {
  std::string kind = "constant";  // constant | cosine_perturbation | table | well_prepared
  double value = 0.0;             // constant value, or base for cosine_perturbation
  double amplitude = 0.0;
  int mode = 1;
  std::vector<double> table;

  RealField sample(const Grid& grid) const;
};

struct DopingSpec {
  std::string kind = "uniform";  // uniform | table | none
  std::optional<double> m0;      // uniform level; the initial mass when absent
  std::vector<double> table;

  /// Profile for a run with initial mass `mass`; no value for kind none.
  std::optional<DopingProfile> build(const Grid& grid, double mass) const;
};

struct DecaySpec {
  std::vector<double> c1;              // scanned downwards; empty uses the default weight
  double transient_fraction = 0.2;     // fraction of [0, T] treated as transient
  double noise_floor = 1e-8;           // samples with F below this fraction of F(0) are ignored
  double tau_regime_max = 1.0;         // decay asserted only for tau at or below this value
};

struct LayerSpec {
  double t_check = 0.1;
  ProfileSpec ill_v;  // velocity of the ill-prepared run (rescaled frame)
};

struct QDDSpec {
  std::optional<double> dt;  // defaults to the run dt
  double tol = 1e-10;
  int max_iter = 200;
};

struct ExperimentConfig {
  std::string experiment = "simulate";
  std::string solver = "sl";  // simulate: sl | qhd | qdd
  int n = 128;
  double dt = 1e-4;
  double t_final = 1.0;
  int samples = 100;  // stored records over [0, T], besides t = 0
  double tau = 1.0;
  std::vector<double> taus;
  bool rescaled = false;
  std::string eos_family = "zero";
  double gamma = 2.0;
  int eos_power = 1;
  double eos_m0 = 1.0;
  DopingSpec doping;
  ProfileSpec rho0;
  ProfileSpec v0;
  double s_star = 0.0;
  std::optional<double> floor;  // defaults to 1e-4 * M0
  std::optional<double> c1;
  std::string integrator;  // strang | picard for sl, erk4 | imex_damping for qhd
  double cfl = 0.5;
  int parallelism = 1;
  unsigned seed = 0;
  QDDSpec qdd;
  DecaySpec decay;
  LayerSpec layer;
  std::vector<std::pair<int, double>> levels{{64, 4e-5}, {128, 2e-5}, {256, 1e-5}};

  Json raw;  // the parsed document, echoed into the output directory

  EOS eos() const;
  Grid grid() const { return Grid(n); }
  /// Record cadence in steps of size `step` so that about `samples` records cover [0, T].
  int record_every(double step) const;
  double floor_for(double mass) const { return floor ? *floor : 1e-4 * mass; }
};

/// Throws Error(Config) on malformed documents, unknown keys or invalid values.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::string& path);

}  // namespace qhd
