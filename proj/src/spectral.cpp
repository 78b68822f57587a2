#include "qhd/spectral.hpp"

#include "qhd/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace qhd {

namespace {

// FFTW planning is not thread-safe, execution with new-array calls is. Plans are
// created once per size with FFTW_ESTIMATE | FFTW_UNALIGNED, so the chosen
// codelets (and therefore every result bit) do not depend on buffer alignment
// or on which thread first asked for the size.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto* in = fftw_alloc_complex(static_cast<size_t>(n));
  auto* out = fftw_alloc_complex(static_cast<size_t>(n));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags),
             fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags)};
  fftw_free(in);
  fftw_free(out);
  cache.emplace(n, p);
  return p;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const Complex* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

struct Grid::Data {
  RealField x;
  RealField k;
  PlanPair plans;
};

Grid::Grid(int n) : n_(n) {
  if (n < 8 || n % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument, "grid size must be even and >= 8, got " + std::to_string(n));
  }
  auto d = std::make_shared<Data>();
  d->x = RealField::LinSpaced(n, 0.0, 1.0 - 1.0 / n);
  d->k.resize(n);
  for (int j = 0; j < n; ++j) d->k[j] = 2.0 * std::numbers::pi * mode(j);
  d->plans = plans_for(n);
  data_ = std::move(d);
}

const RealField& Grid::points() const noexcept { return data_->x; }
const RealField& Grid::wavenumbers() const noexcept { return data_->k; }

ComplexField Grid::forward(const ComplexField& f) const {
  ComplexField out(n_);
  fftw_execute_dft(data_->plans.forward, as_fftw(f.data()), as_fftw(out.data()));
  return out;
}

ComplexField Grid::forward(const RealField& f) const {
  return forward(ComplexField(f.cast<Complex>()));
}

ComplexField Grid::inverse(const ComplexField& f_hat) const {
  ComplexField out(n_);
  fftw_execute_dft(data_->plans.backward, as_fftw(f_hat.data()), as_fftw(out.data()));
  out /= static_cast<double>(n_);
  return out;
}

RealField Grid::inverse_real(const ComplexField& f_hat) const { return inverse(f_hat).real(); }

namespace {

// (i k)^order, with the Nyquist slot zeroed for odd orders.
ComplexField derivative_symbol(const Grid& grid, int order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "derivative order must be >= 1");
  const int n = grid.size();
  const RealField& k = grid.wavenumbers();
  static const Complex i_pow[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  ComplexField sym(n);
  for (int j = 0; j < n; ++j) sym[j] = i_pow[order % 4] * std::pow(k[j], order);
  if (order % 2 == 1) sym[n / 2] = 0.0;
  return sym;
}

}  // namespace

RealField deriv(const Grid& grid, const RealField& f, int order) {
  ComplexField f_hat = grid.forward(f);
  f_hat *= derivative_symbol(grid, order);
  return grid.inverse_real(f_hat);
}

ComplexField deriv(const Grid& grid, const ComplexField& f, int order) {
  ComplexField f_hat = grid.forward(f);
  f_hat *= derivative_symbol(grid, order);
  return grid.inverse(f_hat);
}

double integrate(const Grid& grid, const RealField& f) { return f.sum() * grid.dx(); }

Complex integrate(const Grid& grid, const ComplexField& f) { return f.sum() * grid.dx(); }

RealField antideriv_zero_mean(const Grid& grid, const RealField& f, double mean_tol) {
  const double m = integrate(grid, f);
  if (std::abs(m) > mean_tol) {
    throw Error(ErrorKind::NonZeroMean, "antiderivative of a field with mean " + std::to_string(m));
  }
  const int n = grid.size();
  const RealField& k = grid.wavenumbers();
  ComplexField f_hat = grid.forward(f);
  f_hat[0] = 0.0;
  f_hat[n / 2] = 0.0;
  for (int j = 1; j < n; ++j) {
    if (j != n / 2) f_hat[j] /= Complex(0.0, k[j]);
  }
  return grid.inverse_real(f_hat);
}

namespace {

void apply_dealias_mask(const Grid& grid, ComplexField& f_hat) {
  const int cutoff = grid.dealias_cutoff();
  for (int j = 0; j < grid.size(); ++j) {
    if (std::abs(grid.mode(j)) > cutoff) f_hat[j] = 0.0;
  }
}

}  // namespace

RealField dealias(const Grid& grid, const RealField& f) {
  ComplexField f_hat = grid.forward(f);
  apply_dealias_mask(grid, f_hat);
  return grid.inverse_real(f_hat);
}

ComplexField dealias(const Grid& grid, const ComplexField& f) {
  ComplexField f_hat = grid.forward(f);
  apply_dealias_mask(grid, f_hat);
  return grid.inverse(f_hat);
}

RealField filtered_deriv(const Grid& grid, const RealField& f, int order, double rel_tol) {
  ComplexField f_hat = grid.forward(f);
  const double cut = rel_tol * f_hat.abs().maxCoeff();
  for (auto& c : f_hat) {
    if (std::abs(c) < cut) c = 0.0;
  }
  f_hat *= derivative_symbol(grid, order);
  return grid.inverse_real(f_hat);
}

double spectral_l2_squared(const Grid& grid, const RealField& f) {
  const double n = grid.size();
  return grid.forward(f).abs2().sum() / (n * n);
}

double l2_norm(const Grid& grid, const RealField& f) { return std::sqrt(integrate(grid, RealField(f.square()))); }

}  // namespace qhd
