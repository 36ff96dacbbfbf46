#ifndef EXPOCOL_TORUS_GRID_H_
#define EXPOCOL_TORUS_GRID_H_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace expocol {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

namespace detail {
class FftPlan;
}  // namespace detail

// Uniform periodic tensor grid on [0, L)^d with N points per dimension.
//
// Modes are stored in FFT order: flat index m decomposes row-major into
// per-axis indices i in [0, N), and the integer wavenumber of axis index i is
// i for i < N/2 and i - N otherwise, so the table covers {-N/2, ..., N/2-1}^d.
// The physical wavenumber is kappa = 2*pi*k/L componentwise and the Laplacian
// symbol is lap_symbol[m] = -|kappa|^2.
//
// A TorusGrid is a cheap handle: copies share the immutable tables and the
// reentrant FFT plans.
class TorusGrid {
 public:
  int dim() const { return data_->dim; }
  int points_per_dim() const { return data_->n; }
  double period() const { return data_->period; }
  // N^d; also the number of Fourier modes.
  std::size_t size() const { return data_->size; }

  // Integer multi-index k of `mode`, d entries.
  std::span<const int> wavenumber(std::size_t mode) const {
    return {data_->wavenumbers.data() + mode * data_->dim,
            static_cast<std::size_t>(data_->dim)};
  }
  // Physical wavenumber kappa = 2*pi*k/L along `axis` for `mode`.
  double physical_wavenumber(std::size_t mode, int axis) const;
  // |kappa(k)|_2 per mode.
  const std::vector<double>& wavenumber_norm() const { return data_->kappa_norm; }
  const std::vector<double>& lap_symbol() const { return data_->lap_symbol; }

  // Coordinate of grid point `point` along `axis`: x = j*L/N.
  double coordinate(std::size_t point, int axis) const;

  // Flat mode index of the integer multi-index k (each entry in
  // [-N/2, N/2-1]).
  std::size_t mode_index(std::span<const int> k) const;

  // Unnormalized forward DFT, out_k = sum_j in_j exp(-i k.x_j). `in` and
  // `out` may alias.
  void forward_dft(std::span<const Complex> in, std::span<Complex> out) const;
  // Unnormalized inverse DFT, out_j = sum_k in_k exp(+i k.x_j).
  void backward_dft(std::span<const Complex> in, std::span<Complex> out) const;

  // Same (d, N, L); plans are not compared.
  bool operator==(const TorusGrid& other) const {
    return dim() == other.dim() && points_per_dim() == other.points_per_dim() &&
           period() == other.period();
  }

 private:
  struct Data {
    int dim = 0;
    int n = 0;
    double period = 0.0;
    std::size_t size = 0;
    std::vector<int> wavenumbers;
    std::vector<double> kappa_norm;
    std::vector<double> lap_symbol;
    std::shared_ptr<const detail::FftPlan> plan;
  };

  friend TorusGrid make_grid(int dim, int n, double period);
  explicit TorusGrid(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

// Throws InvalidGridError unless dim >= 1, n even with n >= 4, period > 0
// and N^d fits comfortably in memory.
TorusGrid make_grid(int dim, int n, double period);

}  // namespace expocol

#endif  // EXPOCOL_TORUS_GRID_H_
