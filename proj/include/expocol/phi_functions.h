#ifndef EXPOCOL_PHI_FUNCTIONS_H_
#define EXPOCOL_PHI_FUNCTIONS_H_

#include <span>
#include <vector>

#include "expocol/torus_grid.h"

namespace expocol {

// phi_0(z) = e^z and phi_{m+1}(z) = (phi_m(z) - 1/m!)/z, phi_m(0) = 1/m!;
// equivalently phi_m(z) = int_0^1 e^{(1-t)z} t^{m-1}/(m-1)! dt for m >= 1.
//
// Orders m >= 1 switch from a truncated Taylor series to the upward
// recurrence at |z| = phi_switch_radius(m). The radius grows with m so that
// the recurrence's 1/|z|^m error amplification stays O(1).
Complex phi(int m, Complex z);

// max(0.5, m/2).
double phi_switch_radius(int m);

// phi_0..phi_{max_order} at each argument: values[m][i] = phi_m(args[i]).
struct PhiTable {
  int max_order = 0;
  std::vector<Complex> args;
  std::vector<std::vector<Complex>> values;
};

// Throws std::invalid_argument for max_order < 1.
PhiTable phi_table(std::span<const Complex> args, int max_order);

namespace detail {
// The two branches behind phi(), exposed for consistency checks at the
// switch radius. Both require m >= 1.
Complex phi_series(int m, Complex z);
Complex phi_recurrence(int m, Complex z);
}  // namespace detail

}  // namespace expocol

#endif  // EXPOCOL_PHI_FUNCTIONS_H_
