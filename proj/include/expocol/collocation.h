#ifndef EXPOCOL_COLLOCATION_H_
#define EXPOCOL_COLLOCATION_H_

#include <functional>
#include <span>
#include <vector>

#include "expocol/phi_functions.h"
#include "expocol/torus_grid.h"

namespace expocol {

inline constexpr int kMaxStages = 10;

// Gauss-Legendre nodes and weights on [0, 1], nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Collocation data for r stages: the r-point Gauss rule on [0, 1] and the
// orthonormal shifted Legendre basis psi_j(t) = sum_m basis[j][m] t^m,
// psi_j(t) = sqrt(2j+1) P_j(2t-1), j = 0..r-1.
struct CollocationTableau {
  int r = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<std::vector<double>> basis;

  // psi_j(t) by the Legendre recurrence, 0 <= j < r.
  double basis_value(int j, double t) const;
  // P_{tau,sigma} = sum_j psi_j(tau) psi_j(sigma).
  double projection_kernel(double tau, double sigma) const;
};

// Monomial coefficients of psi_0..psi_{r-1}; row j has j+1 entries with a
// positive leading coefficient. Throws std::invalid_argument for r < 1.
std::vector<std::vector<double>> shifted_legendre_coeffs(int r);

// Exact for polynomials of degree <= 2r-1. Throws std::invalid_argument for
// r < 1.
QuadratureRule gauss_legendre(int r);

// Throws std::invalid_argument unless 1 <= r <= kMaxStages.
CollocationTableau make_tableau(int r);

// L2([0,1]) projection of g onto span{psi_0..psi_{r-1}}, evaluated at
// `taus`. The inner products use a Gauss rule with `quadrature_points`
// nodes; pick it so that 2*points-1 >= degree(g) + r - 1 for exact results.
std::vector<double> projection_apply(const CollocationTableau& tableau,
                                     const std::function<double(double)>& g,
                                     std::span<const double> taus, int quadrature_points = 32);

// Diagonal multiplier of
//   Abar_{tau, c_l}(i Lambda) = int_0^1 e^{(1-xi) tau h i Lambda} P_{xi tau, c_l} dxi
//                             = sum_j psi_j(c_l) sum_{m<=j} basis[j][m] tau^m m! phi_{m+1}(tau h i Lambda)
// per mode. `phis` must hold phi_1..phi_r at the arguments i*tau*h*lambda_k.
// `stage` is the 0-based stage index l; throws std::out_of_range outside
// [0, r).
ComplexVector abar_multiplier(const CollocationTableau& tableau, const PhiTable& phis,
                              double tau, int stage);

// Same, building the phi table from the Laplacian symbol.
ComplexVector abar_multiplier(const CollocationTableau& tableau, double tau, int stage,
                              std::span<const double> lap_symbol, double h);

// Every diagonal array an ECM step needs at one stepsize:
//   stage_propagators[k] = e^{c_k h i lambda},  final_propagator = e^{h i lambda},
//   abar_stage[k][l] = Abar_{c_k, c_l},          abar_final[l] = Abar_{1, c_l}.
struct EcmOperatorSet {
  double h = 0.0;
  std::vector<ComplexVector> stage_propagators;
  ComplexVector final_propagator;
  std::vector<std::vector<ComplexVector>> abar_stage;
  std::vector<ComplexVector> abar_final;
};

// Throws std::invalid_argument for h <= 0.
EcmOperatorSet build_operator_set(const TorusGrid& grid, const CollocationTableau& tableau,
                                  double h);

}  // namespace expocol

#endif  // EXPOCOL_COLLOCATION_H_
