#pragma once

// Experiment drivers behind the command-line tool.

#include "qhd/io.hpp"

#include <functional>
#include <vector>

namespace qhd {

struct RateFit {
  std::vector<double> taus;
  std::vector<double> errors;
  double slope = 0.0;      // d log(error) / d log(tau)
  double intercept = 0.0;  // log(error) at tau = 1
  double residual = 0.0;   // RMS of the log-space residuals
};

/// Least-squares line through (log tau, log error); needs at least three positive points.
RateFit fit_rate(const std::vector<double>& taus, const std::vector<double>& errors);

/// min{c1, sqrt(c1)/4, sqrt(2 c1 delta / (8 + delta))}.
double tau0_heuristic(double c1, double delta);

/// Runs fn(0..count-1) on up to `degree` threads. Results must be written by index;
/// the first exception (lowest index) is rethrown after all tasks finished.
void parallel_for(size_t count, int degree, const std::function<void(size_t)>& fn);

/// Diagnostics CSV of a hydrodynamic trajectory; `with_winding` appends v_winding.
Table trajectory_table(const Trajectory& traj, const std::string& name, bool with_winding);
Table qdd_table(const QDDTrajectory& traj, const std::string& name);

RunOutput run_simulate(const ExperimentConfig& cfg);
RunOutput run_relaxation_sweep(const ExperimentConfig& cfg);
RunOutput run_entropy_decay(const ExperimentConfig& cfg);
RunOutput run_initial_layer(const ExperimentConfig& cfg);
RunOutput run_validate(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
RunOutput run_experiment(const ExperimentConfig& cfg);

}  // namespace qhd
