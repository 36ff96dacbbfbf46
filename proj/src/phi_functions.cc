#include "expocol/phi_functions.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace expocol {
namespace {

double inverse_factorial(int m) {
  double v = 1.0;
  for (int i = 2; i <= m; ++i) v /= i;
  return v;
}

// sum_{k>=0} z^k/(k+m)!; only used for |z| < phi_switch_radius(m) where the
// terms decrease at least geometrically with ratio 1/2 (or |z| < 0.5 for
// small m).
Complex phi_taylor(int m, Complex z) {
  Complex term = inverse_factorial(m);
  Complex sum = term;
  for (int k = 1; k < 500; ++k) {
    term *= z / static_cast<double>(k + m);
    sum += term;
    if (std::abs(term) < 1e-20 * std::abs(sum)) break;
  }
  return sum;
}

// Fills out[0..max_order] for one argument.
void phi_all(Complex z, int max_order, std::span<Complex> out) {
  out[0] = std::exp(z);
  const double r = std::abs(z);
  Complex current = out[0];
  double inv_fact = 1.0;  // 1/(m-1)! at the top of iteration m
  bool recurrence_valid = true;
  for (int m = 1; m <= max_order; ++m) {
    if (recurrence_valid && r >= phi_switch_radius(m)) {
      current = (current - inv_fact) / z;
      out[m] = current;
    } else {
      // The radius is nondecreasing in m, so once the series takes over it
      // keeps going.
      recurrence_valid = false;
      out[m] = phi_taylor(m, z);
    }
    inv_fact /= m;
  }
}

}  // namespace

double phi_switch_radius(int m) { return std::max(0.5, 0.5 * m); }

Complex phi(int m, Complex z) {
  if (m < 0) throw std::invalid_argument("phi order must be non-negative");
  if (m == 0) return std::exp(z);
  if (std::abs(z) < phi_switch_radius(m)) return phi_taylor(m, z);
  std::vector<Complex> all(m + 1);
  phi_all(z, m, all);
  return all[m];
}

namespace detail {

Complex phi_series(int m, Complex z) { return phi_taylor(m, z); }

Complex phi_recurrence(int m, Complex z) {
  Complex current = std::exp(z);
  double inv_fact = 1.0;
  for (int j = 1; j <= m; ++j) {
    current = (current - inv_fact) / z;
    inv_fact /= j;
  }
  return current;
}

}  // namespace detail

PhiTable phi_table(std::span<const Complex> args, int max_order) {
  if (max_order < 1) throw std::invalid_argument("phi table needs max_order >= 1");
  PhiTable table;
  table.max_order = max_order;
  table.args.assign(args.begin(), args.end());
  table.values.assign(max_order + 1, std::vector<Complex>(args.size()));
  std::vector<Complex> column(max_order + 1);
  for (std::size_t i = 0; i < args.size(); ++i) {
    phi_all(args[i], max_order, column);
    for (int m = 0; m <= max_order; ++m) table.values[m][i] = column[m];
  }
  return table;
}

}  // namespace expocol
