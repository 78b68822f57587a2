#include "qhd/poisson.hpp"

#include "qhd/error.hpp"

#include <cmath>
#include <string>

namespace qhd {

RealField solve_poisson(const Grid& grid, const RealField& source) {
  const RealField& k = grid.wavenumbers();
  ComplexField s_hat = grid.forward(source);
  s_hat[0] = 0.0;
  for (int j = 1; j < grid.size(); ++j) s_hat[j] /= k[j] * k[j];
  return grid.inverse_real(s_hat);
}

RealField solve_potential(const Grid& grid, const RealField& rho, const DopingProfile& doping,
                          double compat_tol) {
  RealField source = rho - doping.c;
  const double net = integrate(grid, source);
  if (std::abs(net) > compat_tol) {
    throw Error(ErrorKind::IncompatibleSource,
                "Poisson source has net charge " + std::to_string(net));
  }
  return solve_poisson(grid, source);
}

double electric_energy(const Grid& grid, const RealField& potential) {
  return 0.5 * integrate(grid, RealField(deriv(grid, potential, 1).square()));
}

}  // namespace qhd
