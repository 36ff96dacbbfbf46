#include "expocol/torus_grid.h"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "expocol/errors.h"

namespace expocol {
namespace detail {

// FFTW planning is not thread safe; execution through fftw_execute_dft on
// an existing plan is. All plans are built unaligned so any buffer works.
class FftPlan {
 public:
  FftPlan(int dim, int n) {
    std::vector<int> dims(dim, n);
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
    fftw_complex* in = fftw_alloc_complex(total);
    fftw_complex* out = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      forward_ = fftw_plan_dft(dim, dims.data(), in, out, FFTW_FORWARD, flags);
      backward_ = fftw_plan_dft(dim, dims.data(), in, out, FFTW_BACKWARD, flags);
    }
    fftw_free(in);
    fftw_free(out);
  }

  ~FftPlan() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void execute(bool forward, const Complex* in, Complex* out) const {
    // std::complex<double> is layout compatible with fftw_complex.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in));
    auto* dst = reinterpret_cast<fftw_complex*>(out);
    fftw_execute_dft(forward ? forward_ : backward_, src, dst);
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

namespace {
constexpr std::size_t kMaxGridSize = std::size_t{1} << 28;

void check_and_run(const detail::FftPlan& plan, bool forward, std::size_t size,
                   std::span<const Complex> in, std::span<Complex> out) {
  if (in.size() != size || out.size() != size) {
    throw SizeMismatchError("dft buffer size does not match grid");
  }
  if (in.data() == out.data()) {
    // Plans are out-of-place.
    ComplexVector copy(in.begin(), in.end());
    plan.execute(forward, copy.data(), out.data());
  } else {
    plan.execute(forward, in.data(), out.data());
  }
}
}  // namespace

TorusGrid make_grid(int dim, int n, double period) {
  if (dim < 1) {
    throw InvalidGridError("grid dimension must be >= 1, got " + std::to_string(dim));
  }
  if (n < 4 || n % 2 != 0) {
    throw InvalidGridError("points per dimension must be even and >= 4, got " +
                           std::to_string(n));
  }
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw InvalidGridError("period must be positive and finite");
  }
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) {
    total *= static_cast<std::size_t>(n);
    if (total > kMaxGridSize) throw InvalidGridError("grid too large");
  }

  auto data = std::make_shared<TorusGrid::Data>();
  data->dim = dim;
  data->n = n;
  data->period = period;
  data->size = total;
  data->wavenumbers.resize(total * dim);
  data->kappa_norm.resize(total);
  data->lap_symbol.resize(total);

  const double scale = 2.0 * std::numbers::pi / period;
  for (std::size_t m = 0; m < total; ++m) {
    std::size_t rest = m;
    double kappa2 = 0.0;
    // Row-major: last axis varies fastest.
    for (int axis = dim - 1; axis >= 0; --axis) {
      const int i = static_cast<int>(rest % n);
      rest /= n;
      const int k = i < n / 2 ? i : i - n;
      data->wavenumbers[m * dim + axis] = k;
      const double kappa = scale * k;
      kappa2 += kappa * kappa;
    }
    data->kappa_norm[m] = std::sqrt(kappa2);
    data->lap_symbol[m] = m == 0 ? 0.0 : -kappa2;
  }
  data->plan = std::make_shared<const detail::FftPlan>(dim, n);
  return TorusGrid(std::move(data));
}

double TorusGrid::physical_wavenumber(std::size_t mode, int axis) const {
  return 2.0 * std::numbers::pi / data_->period * data_->wavenumbers[mode * data_->dim + axis];
}

double TorusGrid::coordinate(std::size_t point, int axis) const {
  const int n = data_->n;
  std::size_t rest = point;
  for (int a = data_->dim - 1; a > axis; --a) rest /= n;
  return static_cast<double>(rest % n) * data_->period / n;
}

std::size_t TorusGrid::mode_index(std::span<const int> k) const {
  const int n = data_->n;
  if (k.size() != static_cast<std::size_t>(data_->dim)) {
    throw SizeMismatchError("multi-index has wrong dimension");
  }
  std::size_t m = 0;
  for (int i : k) {
    if (i < -n / 2 || i >= n / 2) throw SizeMismatchError("wavenumber out of range");
    if (i < 0) i += n;
    m = m * n + static_cast<std::size_t>(i);
  }
  return m;
}

void TorusGrid::forward_dft(std::span<const Complex> in, std::span<Complex> out) const {
  check_and_run(*data_->plan, true, data_->size, in, out);
}

void TorusGrid::backward_dft(std::span<const Complex> in, std::span<Complex> out) const {
  check_and_run(*data_->plan, false, data_->size, in, out);
}

}  // namespace expocol
