#pragma once

#include "qhd/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace testing {

inline constexpr double kPi = std::numbers::pi;

inline double max_abs(const qhd::RealField& f) { return f.abs().maxCoeff(); }

/// Smooth random real field: a few low Fourier modes with bounded amplitude.
inline qhd::RealField random_smooth(const qhd::Grid& g, std::mt19937& rng, double amplitude,
                                    int modes = 4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  qhd::RealField f = qhd::RealField::Zero(g.size());
  for (int m = 1; m <= modes; ++m) {
    const double a = u(rng) * amplitude / m, b = u(rng) * amplitude / m;
    f += g.sample([&](double x) { return a * std::cos(2 * kPi * m * x) + b * std::sin(2 * kPi * m * x); });
  }
  return f;
}

/// Positive density 1 + bounded smooth perturbation.
inline qhd::RealField random_density(const qhd::Grid& g, std::mt19937& rng, double amplitude = 0.1) {
  return 1.0 + random_smooth(g, rng, amplitude).array();
}

/// Values of a field on grid `fine` restricted to the nodes of a grid `factor` times coarser.
inline qhd::RealField restrict_to(const qhd::RealField& fine, int factor) {
  qhd::RealField out(fine.size() / factor);
  for (int j = 0; j < out.size(); ++j) out[j] = fine[j * factor];
  return out;
}

}  // namespace testing
