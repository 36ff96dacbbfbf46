#include "expocol/collocation.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace expocol {
namespace {

double binomial(int n, int k) {
  double v = 1.0;
  for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
  return v;
}

// Legendre P_n and P_n' at x in (-1, 1) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

ComplexVector scaled_args(std::span<const double> lap, double scale) {
  ComplexVector args(lap.size());
  for (std::size_t k = 0; k < lap.size(); ++k) args[k] = Complex(0.0, scale * lap[k]);
  return args;
}

}  // namespace

double CollocationTableau::basis_value(int j, double t) const {
  if (j < 0 || j >= r) throw std::out_of_range("basis index out of range");
  // The recurrence avoids the cancellation Horner suffers on the large
  // monomial coefficients of high degree.
  const double x = 2.0 * t - 1.0;
  double p0 = 1.0;
  double p1 = x;
  if (j == 0) return 1.0;
  for (int k = 2; k <= j; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * j + 1.0) * p1;
}

double CollocationTableau::projection_kernel(double tau, double sigma) const {
  double s = 0.0;
  for (int j = 0; j < r; ++j) s += basis_value(j, tau) * basis_value(j, sigma);
  return s;
}

std::vector<std::vector<double>> shifted_legendre_coeffs(int r) {
  if (r < 1) throw std::invalid_argument("basis size must be >= 1");
  std::vector<std::vector<double>> a(r);
  for (int j = 0; j < r; ++j) {
    // P_j(2t-1) = sum_m (-1)^{j+m} C(j,m) C(j+m,m) t^m.
    const double norm = std::sqrt(2.0 * j + 1.0);
    a[j].resize(j + 1);
    for (int m = 0; m <= j; ++m) {
      const double sign = (j + m) % 2 == 0 ? 1.0 : -1.0;
      a[j][m] = norm * sign * binomial(j, m) * binomial(j + m, m);
    }
  }
  return a;
}

QuadratureRule gauss_legendre(int r) {
  if (r < 1) throw std::invalid_argument("quadrature needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(r);
  rule.weights.resize(r);
  for (int i = 0; i < r; ++i) {
    // Roots of P_r on (-1, 1), descending in x for increasing i.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (r + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      auto [p, d] = legendre_with_derivative(r, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    dp = legendre_with_derivative(r, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map to [0, 1] ascending.
    rule.nodes[r - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[r - 1 - i] = 0.5 * w;
  }
  if (r % 2 == 1) rule.nodes[r / 2] = 0.5;
  return rule;
}

CollocationTableau make_tableau(int r) {
  if (r < 1 || r > kMaxStages) {
    throw std::invalid_argument("stage count must be in [1, " + std::to_string(kMaxStages) +
                                "], got " + std::to_string(r));
  }
  CollocationTableau t;
  t.r = r;
  auto rule = gauss_legendre(r);
  t.nodes = std::move(rule.nodes);
  t.weights = std::move(rule.weights);
  t.basis = shifted_legendre_coeffs(r);
  return t;
}

std::vector<double> projection_apply(const CollocationTableau& tableau,
                                     const std::function<double(double)>& g,
                                     std::span<const double> taus, int quadrature_points) {
  const auto rule = gauss_legendre(quadrature_points);
  std::vector<double> moments(tableau.r, 0.0);
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double gq = g(rule.nodes[q]);
    for (int j = 0; j < tableau.r; ++j) {
      moments[j] += rule.weights[q] * tableau.basis_value(j, rule.nodes[q]) * gq;
    }
  }
  std::vector<double> out(taus.size(), 0.0);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    for (int j = 0; j < tableau.r; ++j) out[i] += tableau.basis_value(j, taus[i]) * moments[j];
  }
  return out;
}

ComplexVector abar_multiplier(const CollocationTableau& tableau, const PhiTable& phis,
                              double tau, int stage) {
  if (stage < 0 || stage >= tableau.r) throw std::out_of_range("stage index out of range");
  if (phis.max_order < tableau.r) {
    throw std::invalid_argument("phi table must cover orders 1..r");
  }
  // weight[m] = tau^m m! sum_{j>=m} psi_j(c_l) basis[j][m]
  const double sigma = tableau.nodes[stage];
  std::vector<double> weight(tableau.r, 0.0);
  double tau_pow_fact = 1.0;
  for (int m = 0; m < tableau.r; ++m) {
    double s = 0.0;
    for (int j = m; j < tableau.r; ++j) s += tableau.basis_value(j, sigma) * tableau.basis[j][m];
    weight[m] = tau_pow_fact * s;
    tau_pow_fact *= tau * (m + 1);
  }
  const std::size_t modes = phis.args.size();
  ComplexVector out(modes, Complex(0.0));
  for (int m = 0; m < tableau.r; ++m) {
    const auto& row = phis.values[m + 1];
    for (std::size_t k = 0; k < modes; ++k) out[k] += weight[m] * row[k];
  }
  return out;
}

ComplexVector abar_multiplier(const CollocationTableau& tableau, double tau, int stage,
                              std::span<const double> lap_symbol, double h) {
  const auto args = scaled_args(lap_symbol, tau * h);
  return abar_multiplier(tableau, phi_table(args, tableau.r), tau, stage);
}

EcmOperatorSet build_operator_set(const TorusGrid& grid, const CollocationTableau& tableau,
                                  double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("stepsize must be positive");
  const auto& lap = grid.lap_symbol();
  const int r = tableau.r;

  EcmOperatorSet ops;
  ops.h = h;
  ops.stage_propagators.resize(r);
  ops.abar_stage.resize(r);
  for (int k = 0; k < r; ++k) {
    const double tau = tableau.nodes[k];
    const auto phis = phi_table(scaled_args(lap, tau * h), r);
    ops.stage_propagators[k] = phis.values[0];
    ops.abar_stage[k].resize(r);
    for (int l = 0; l < r; ++l) ops.abar_stage[k][l] = abar_multiplier(tableau, phis, tau, l);
  }
  const auto phis = phi_table(scaled_args(lap, h), r);
  ops.final_propagator = phis.values[0];
  ops.abar_final.resize(r);
  for (int l = 0; l < r; ++l) ops.abar_final[l] = abar_multiplier(tableau, phis, 1.0, l);
  return ops;
}

}  // namespace expocol
