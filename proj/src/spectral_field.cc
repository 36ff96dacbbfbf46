#include "expocol/spectral_field.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <vector>

#include "expocol/errors.h"

namespace expocol {

SpectralField SpectralField::from_physical(TorusGrid grid, ComplexVector samples) {
  if (samples.size() != grid.size()) {
    throw SizeMismatchError("sample count does not match grid size");
  }
  SpectralField f(std::move(grid));
  f.phys_ = std::move(samples);
  f.has_phys_ = true;
  return f;
}

SpectralField SpectralField::from_fourier(TorusGrid grid, ComplexVector coefficients) {
  if (coefficients.size() != grid.size()) {
    throw SizeMismatchError("coefficient count does not match grid size");
  }
  SpectralField f(std::move(grid));
  f.coef_ = std::move(coefficients);
  f.has_coef_ = true;
  return f;
}

SpectralField SpectralField::sample(
    TorusGrid grid, const std::function<Complex(std::span<const double>)>& fn) {
  const int dim = grid.dim();
  ComplexVector samples(grid.size());
  std::vector<double> x(dim);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (int axis = 0; axis < dim; ++axis) x[axis] = grid.coordinate(j, axis);
    samples[j] = fn(x);
  }
  return from_physical(std::move(grid), std::move(samples));
}

const ComplexVector& SpectralField::physical() const {
  if (!has_phys_) throw std::logic_error("physical representation is not current");
  return phys_;
}

const ComplexVector& SpectralField::fourier() const {
  if (!has_coef_) throw std::logic_error("Fourier representation is not current");
  return coef_;
}

void samples_to_coefficients(const TorusGrid& grid, std::span<const Complex> samples,
                             std::span<Complex> coefficients) {
  grid.forward_dft(samples, coefficients);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& c : coefficients) c *= scale;
}

void coefficients_to_samples(const TorusGrid& grid, std::span<const Complex> coefficients,
                             std::span<Complex> samples) {
  grid.backward_dft(coefficients, samples);
}

SpectralField to_fourier(SpectralField f) {
  if (f.has_coef_) return f;
  f.coef_.resize(f.grid_.size());
  samples_to_coefficients(f.grid_, f.phys_, f.coef_);
  f.has_coef_ = true;
  return f;
}

SpectralField to_physical(SpectralField f) {
  if (f.has_phys_) return f;
  f.phys_.resize(f.grid_.size());
  coefficients_to_samples(f.grid_, f.coef_, f.phys_);
  f.has_phys_ = true;
  return f;
}

namespace {

// Returns the requested representation, converting into `scratch` only
// when it is not already current.
const ComplexVector& coefficients_of(const SpectralField& f,
                                     std::optional<SpectralField>& scratch) {
  if (f.has_fourier()) return f.fourier();
  scratch = to_fourier(f);
  return scratch->fourier();
}

const ComplexVector& samples_of(const SpectralField& f, std::optional<SpectralField>& scratch) {
  if (f.has_physical()) return f.physical();
  scratch = to_physical(f);
  return scratch->physical();
}

double h_alpha_sum(const TorusGrid& grid, std::span<const Complex> coef, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  const auto& kappa = grid.wavenumber_norm();
  double sum = std::norm(coef[0]);
  for (std::size_t k = 1; k < coef.size(); ++k) {
    const double weight = alpha == 0.0 ? 1.0 : std::pow(kappa[k], 2.0 * alpha);
    sum += std::norm(coef[k]) * weight;
  }
  return sum;
}

}  // namespace

double h_alpha_norm(const SpectralField& f, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  std::optional<SpectralField> scratch;
  return std::sqrt(h_alpha_sum(f.grid(), coefficients_of(f, scratch), alpha));
}

double mass(const SpectralField& f) { return h_alpha_norm(f, 0.0); }

double energy(const SpectralField& f, double lambda) {
  std::optional<SpectralField> coef_scratch;
  std::optional<SpectralField> phys_scratch;
  const auto& coef = coefficients_of(f, coef_scratch);
  const auto& phys = samples_of(f, phys_scratch);
  const auto& lap = f.grid().lap_symbol();

  double kinetic = 0.0;
  for (std::size_t k = 0; k < coef.size(); ++k) kinetic -= lap[k] * std::norm(coef[k]);
  double quartic = 0.0;
  for (const auto& u : phys) {
    const double a = std::norm(u);
    quartic += a * a;
  }
  quartic /= static_cast<double>(phys.size());
  return 0.5 * kinetic + 0.25 * lambda * quartic;
}

SpectralField apply_diagonal(std::span<const Complex> multiplier, const SpectralField& f) {
  std::optional<SpectralField> scratch;
  const auto& coef = coefficients_of(f, scratch);
  if (multiplier.size() != coef.size()) {
    throw SizeMismatchError("multiplier size does not match field");
  }
  ComplexVector out(coef.size());
  for (std::size_t k = 0; k < coef.size(); ++k) out[k] = multiplier[k] * coef[k];
  return SpectralField::from_fourier(f.grid(), std::move(out));
}

SpectralField nonlinearity(const SpectralField& f, double lambda) {
  std::optional<SpectralField> scratch;
  const auto& u = samples_of(f, scratch);
  ComplexVector g(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) g[j] = -lambda * std::norm(u[j]) * u[j];
  return SpectralField::from_physical(f.grid(), std::move(g));
}

double h_alpha_distance(const SpectralField& a, const SpectralField& b, double alpha) {
  if (!(a.grid() == b.grid())) throw SizeMismatchError("fields live on different grids");
  std::optional<SpectralField> sa;
  std::optional<SpectralField> sb;
  const auto& ca = coefficients_of(a, sa);
  const auto& cb = coefficients_of(b, sb);
  ComplexVector diff(ca.size());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = ca[k] - cb[k];
  return std::sqrt(h_alpha_sum(a.grid(), diff, alpha));
}

double max_distance(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw SizeMismatchError("fields live on different grids");
  std::optional<SpectralField> sa;
  std::optional<SpectralField> sb;
  const auto& pa = samples_of(a, sa);
  const auto& pb = samples_of(b, sb);
  double m = 0.0;
  for (std::size_t j = 0; j < pa.size(); ++j) m = std::max(m, std::abs(pa[j] - pb[j]));
  return m;
}

std::vector<double> two_thirds_mask(const TorusGrid& grid) {
  std::vector<double> mask(grid.size(), 1.0);
  const int cutoff = grid.points_per_dim() / 3;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    for (int k : grid.wavenumber(m)) {
      if (std::abs(k) > cutoff) {
        mask[m] = 0.0;
        break;
      }
    }
  }
  return mask;
}

}  // namespace expocol
