#pragma once

// Periodic pseudo-spectral substrate on the unit torus R/Z.

#include <Eigen/Core>

#include <complex>
#include <memory>

namespace qhd {

using RealField = Eigen::ArrayXd;
using ComplexField = Eigen::ArrayXcd;
using Complex = std::complex<double>;

/// Uniform periodic sampling x_j = j/n of the unit torus, plus its Fourier dual.
/// Copies share the precomputed wavenumbers and FFT plans.
class Grid {
 public:
  explicit Grid(int n);

  int size() const noexcept { return n_; }
  double dx() const noexcept { return 1.0 / n_; }
  const RealField& points() const noexcept;
  /// Angular wavenumbers k = 2*pi*m in FFT storage order; the Nyquist slot holds m = -n/2.
  const RealField& wavenumbers() const noexcept;
  /// Highest mode index kept by dealias().
  int dealias_cutoff() const noexcept { return n_ / 3; }
  /// Integer mode index m of storage slot j.
  int mode(int j) const noexcept { return j < n_ / 2 ? j : j - n_; }

  /// Unnormalised forward DFT.
  ComplexField forward(const ComplexField& f) const;
  ComplexField forward(const RealField& f) const;
  /// Inverse DFT including the 1/n factor.
  ComplexField inverse(const ComplexField& f_hat) const;
  /// Inverse DFT of a Hermitian spectrum; drops the (round-off) imaginary part.
  RealField inverse_real(const ComplexField& f_hat) const;

  /// Sample a callable double(double) at the grid points.
  template <class F>
  RealField sample(F&& f) const {
    RealField out(n_);
    const RealField& x = points();
    for (int j = 0; j < n_; ++j) out[j] = f(x[j]);
    return out;
  }

  bool operator==(const Grid& other) const noexcept { return n_ == other.n_; }

 private:
  struct Data;
  int n_;
  std::shared_ptr<const Data> data_;
};

/// Spectral derivative of the given order (order >= 1). Odd orders zero the Nyquist mode.
RealField deriv(const Grid& grid, const RealField& f, int order = 1);
ComplexField deriv(const Grid& grid, const ComplexField& f, int order = 1);

/// Periodic trapezoidal quadrature over the unit torus (equals the mean value).
double integrate(const Grid& grid, const RealField& f);
Complex integrate(const Grid& grid, const ComplexField& f);

inline double mean(const Grid& grid, const RealField& f) { return integrate(grid, f); }

/// Zero-mean F with dF/dx = f. Throws NonZeroMean when |mean(f)| > mean_tol.
RealField antideriv_zero_mean(const Grid& grid, const RealField& f, double mean_tol = 1e-10);

/// 2/3-rule: zero every Fourier mode with |m| > n/3.
RealField dealias(const Grid& grid, const RealField& f);
ComplexField dealias(const Grid& grid, const ComplexField& f);

/// Derivative after a Krasny filter: Fourier modes below rel_tol times the largest are dropped.
RealField filtered_deriv(const Grid& grid, const RealField& f, int order, double rel_tol = 1e-16);

/// Integral of f^2 evaluated in Fourier space (Parseval).
double spectral_l2_squared(const Grid& grid, const RealField& f);

/// ||f||_{L^2(T)} by quadrature.
double l2_norm(const Grid& grid, const RealField& f);

}  // namespace qhd
