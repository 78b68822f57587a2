#pragma once

#include "qhd/state.hpp"

namespace qhd {

/// Zero-mean solution V of -V_xx = rho - C.
/// Throws IncompatibleSource when |integral(rho - C)| > compat_tol.
RealField solve_potential(const Grid& grid, const RealField& rho, const DopingProfile& doping,
                          double compat_tol = 1e-8);

/// Zero-mean solution of -V_xx = source for an already compatible source (mean removed).
RealField solve_poisson(const Grid& grid, const RealField& source);

/// 1/2 integral of (V_x)^2.
double electric_energy(const Grid& grid, const RealField& potential);

}  // namespace qhd
