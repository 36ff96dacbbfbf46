#ifndef EXPOCOL_SPECTRAL_FIELD_H_
#define EXPOCOL_SPECTRAL_FIELD_H_

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "expocol/torus_grid.h"

namespace expocol {

// Complex field on a TorusGrid carrying grid samples u_j and/or the
// mean-normalized Fourier coefficients
//
//   uhat_k = N^{-d} sum_j u_j exp(-i kappa(k).x_j),
//
// so that uhat_0 is the mean and coefficient sums reproduce the
// (2*pi)^{-d}-normalized integrals of the continuous setting. Each
// representation is immutable once set; conversions return new fields.
class SpectralField {
 public:
  static SpectralField from_physical(TorusGrid grid, ComplexVector samples);
  static SpectralField from_fourier(TorusGrid grid, ComplexVector coefficients);
  // Samples `fn` at every grid point; `fn` receives the d coordinates.
  static SpectralField sample(TorusGrid grid,
                              const std::function<Complex(std::span<const double>)>& fn);

  const TorusGrid& grid() const { return grid_; }
  bool has_physical() const { return has_phys_; }
  bool has_fourier() const { return has_coef_; }

  // Throw std::logic_error when the representation is not current.
  const ComplexVector& physical() const;
  const ComplexVector& fourier() const;

 private:
  explicit SpectralField(TorusGrid grid) : grid_(std::move(grid)) {}

  friend SpectralField to_fourier(SpectralField f);
  friend SpectralField to_physical(SpectralField f);

  TorusGrid grid_;
  ComplexVector phys_;
  ComplexVector coef_;
  bool has_phys_ = false;
  bool has_coef_ = false;
};

// Populate the missing representation (no-op when already current).
SpectralField to_fourier(SpectralField f);
SpectralField to_physical(SpectralField f);

// Buffer-level transforms with the same normalization, for hot loops.
void samples_to_coefficients(const TorusGrid& grid, std::span<const Complex> samples,
                             std::span<Complex> coefficients);
void coefficients_to_samples(const TorusGrid& grid, std::span<const Complex> coefficients,
                             std::span<Complex> samples);

// coef_k <- m_k * coef_k; the result has only the Fourier representation.
// Throws SizeMismatchError when m.size() != N^d.
SpectralField apply_diagonal(std::span<const Complex> multiplier, const SpectralField& f);

// (|fhat_0|^2 + sum_{k != 0} |fhat_k|^2 |kappa(k)|^{2 alpha})^{1/2}.
// Throws std::invalid_argument for alpha < 0.
double h_alpha_norm(const SpectralField& f, double alpha);

// L2 norm under the mean normalization, (sum_k |fhat_k|^2)^{1/2}.
double mass(const SpectralField& f);

// Discrete energy
//   H_N = 1/2 sum_k |kappa(k)|^2 |uhat_k|^2 + lambda/4 N^{-d} sum_j |u_j|^4,
// the grid version of (1/(2 L^d)) int |grad u|^2 + (lambda/2)|u|^4 dx.
double energy(const SpectralField& f, double lambda);

// Pointwise g_j = -lambda |u_j|^2 u_j; the result has only the physical
// representation.
SpectralField nonlinearity(const SpectralField& f, double lambda);

// h_alpha_norm(a - b, alpha) for fields on the same grid.
double h_alpha_distance(const SpectralField& a, const SpectralField& b, double alpha);
// max_j |a_j - b_j|.
double max_distance(const SpectralField& a, const SpectralField& b);

// Mask keeping modes with |k_i| <= N/3 on every axis (2/3 rule).
std::vector<double> two_thirds_mask(const TorusGrid& grid);

}  // namespace expocol

#endif  // EXPOCOL_SPECTRAL_FIELD_H_
