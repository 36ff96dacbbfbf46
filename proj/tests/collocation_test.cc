#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/rational.hpp>
#include <gtest/gtest.h>

#include "expocol/collocation.h"
#include "expocol/phi_functions.h"
#include "expocol/torus_grid.h"
#include "oracles.h"

namespace expocol {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI(0.0, 1.0);
using Rational = boost::rational<long long>;
using RationalPoly = std::vector<Rational>;  // monomial coefficients

Rational inner(const RationalPoly& p, const RationalPoly& q) {
  Rational s = 0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    for (std::size_t b = 0; b < q.size(); ++b) {
      s += p[a] * q[b] / Rational(static_cast<long long>(a + b + 1));
    }
  }
  return s;
}

// Gram-Schmidt over 1, t, t^2, ... with exact inner products on [0, 1];
// normalization happens in double at the very end.
std::vector<std::vector<double>> gram_schmidt(int r) {
  std::vector<RationalPoly> ortho;
  for (int j = 0; j < r; ++j) {
    RationalPoly p(j + 1, Rational(0));
    p[j] = 1;
    for (const auto& q : ortho) {
      const Rational c = inner(p, q) / inner(q, q);
      for (std::size_t m = 0; m < q.size(); ++m) p[m] -= c * q[m];
    }
    ortho.push_back(p);
  }
  std::vector<std::vector<double>> out;
  for (const auto& p : ortho) {
    const double norm = std::sqrt(boost::rational_cast<double>(inner(p, p)));
    std::vector<double> row;
    for (const auto& c : p) row.push_back(boost::rational_cast<double>(c) / norm);
    out.push_back(row);
  }
  return out;
}

double integrate_real(const std::function<double(double)>& f, double a = 0.0, double b = 1.0) {
  return oracle::integrate(f, a, b, 1e-15);
}

// int_0^1 e^{(1-xi) tau h i lambda} P_{xi tau, sigma} dxi with the kernel
// built from the recurrence Legendre values.
Complex abar_by_quadrature(int r, double tau, double sigma, double lambda, double h) {
  std::function<Complex(double)> f = [&](double xi) {
    double kernel = 0.0;
    for (int j = 0; j < r; ++j) {
      kernel += oracle::shifted_legendre(j, xi * tau) * oracle::shifted_legendre(j, sigma);
    }
    return std::exp((1.0 - xi) * tau * h * kI * lambda) * kernel;
  };
  return oracle::integrate(f, 0.0, 1.0, 1e-15, 32);
}

TEST(ShiftedLegendre, LowOrders) {
  const auto a1 = shifted_legendre_coeffs(1);
  ASSERT_EQ(a1.size(), 1u);
  EXPECT_EQ(a1[0], std::vector<double>{1.0});

  const auto a2 = shifted_legendre_coeffs(2);
  EXPECT_NEAR(a2[1][0], -std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(a2[1][1], 2.0 * std::sqrt(3.0), 1e-15);

  const auto a3 = shifted_legendre_coeffs(3);
  const double s5 = std::sqrt(5.0);
  EXPECT_NEAR(a3[2][0], s5, 1e-14);
  EXPECT_NEAR(a3[2][1], -6.0 * s5, 1e-14);
  EXPECT_NEAR(a3[2][2], 6.0 * s5, 1e-14);
  EXPECT_THROW(shifted_legendre_coeffs(0), std::invalid_argument);
}

TEST(ShiftedLegendre, MatchesExactGramSchmidt) {
  const int r = 7;
  const auto expected = gram_schmidt(r);
  const auto actual = shifted_legendre_coeffs(r);
  for (int j = 0; j < r; ++j) {
    ASSERT_EQ(actual[j].size(), static_cast<std::size_t>(j + 1));
    EXPECT_GT(actual[j][j], 0.0);
    for (int m = 0; m <= j; ++m) {
      EXPECT_NEAR(actual[j][m], expected[j][m], 1e-12 * std::abs(expected[j][m]))
          << "j=" << j << " m=" << m;
    }
  }
}

TEST(GaussLegendre, ClosedForms) {
  const auto two = gauss_legendre(2);
  EXPECT_NEAR(two.nodes[0], 0.5 - std::sqrt(3.0) / 6.0, 1e-15);
  EXPECT_NEAR(two.nodes[1], 0.5 + std::sqrt(3.0) / 6.0, 1e-15);
  EXPECT_NEAR(two.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(two.weights[1], 0.5, 1e-15);

  const auto three = gauss_legendre(3);
  EXPECT_NEAR(three.nodes[0], 0.5 - std::sqrt(15.0) / 10.0, 1e-15);
  EXPECT_EQ(three.nodes[1], 0.5);
  EXPECT_NEAR(three.nodes[2], 0.5 + std::sqrt(15.0) / 10.0, 1e-15);
  EXPECT_NEAR(three.weights[0], 5.0 / 18.0, 1e-15);
  EXPECT_NEAR(three.weights[1], 4.0 / 9.0, 1e-15);
  EXPECT_NEAR(three.weights[2], 5.0 / 18.0, 1e-15);
  EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(GaussLegendre, PolynomialExactness) {
  for (int r = 1; r <= kMaxStages; ++r) {
    const auto rule = gauss_legendre(r);
    for (int i = 0; i < r; ++i) {
      EXPECT_GT(rule.weights[i], 0.0);
      EXPECT_GT(rule.nodes[i], 0.0);
      EXPECT_LT(rule.nodes[i], 1.0);
      if (i > 0) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
    }
    for (int p = 0; p <= 2 * r - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < r; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], p);
      EXPECT_NEAR(s, 1.0 / (p + 1), 1e-13) << "r=" << r << " p=" << p;
    }
  }
  const auto five = gauss_legendre(5);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += five.weights[i] * std::pow(five.nodes[i], 9);
  EXPECT_NEAR(s, 0.1, 1e-14);
}

TEST(Tableau, BasisIsOrthonormal) {
  const auto rule = gauss_legendre(32);
  for (int r = 1; r <= kMaxStages; ++r) {
    const auto t = make_tableau(r);
    for (int i = 0; i < r; ++i) {
      double mean = 0.0;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        mean += rule.weights[q] * t.basis_value(i, rule.nodes[q]);
      }
      EXPECT_NEAR(mean, i == 0 ? 1.0 : 0.0, 1e-13) << "r=" << r << " j=" << i;
      for (int j = 0; j < r; ++j) {
        double g = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          g += rule.weights[q] * t.basis_value(i, rule.nodes[q]) * t.basis_value(j, rule.nodes[q]);
        }
        EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-12) << "r=" << r << " i=" << i << " j=" << j;
      }
    }
  }
}

TEST(Tableau, BasisMatchesLegendreRecurrence) {
  const auto t = make_tableau(kMaxStages);
  for (int j = 0; j < kMaxStages; ++j) {
    for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
      EXPECT_NEAR(t.basis_value(j, x), oracle::shifted_legendre(j, x), 1e-9) << j << " " << x;
    }
  }
}

TEST(Tableau, RejectsStageCount) {
  EXPECT_THROW(make_tableau(0), std::invalid_argument);
  EXPECT_THROW(make_tableau(kMaxStages + 1), std::invalid_argument);
}

TEST(Projection, ReproducesLowDegreePolynomials) {
  const std::vector<double> taus{0.0, 0.1, 0.333, 0.5, 0.9, 1.0};
  for (int r = 1; r <= 6; ++r) {
    const auto t = make_tableau(r);
    for (int deg = 0; deg < r; ++deg) {
      auto g = [deg](double x) {
        double v = 0.0;
        for (int i = 0; i <= deg; ++i) v += (i % 2 == 0 ? 1.0 : -1.5) * std::pow(x - 0.3, i);
        return v;
      };
      const auto out = projection_apply(t, g, taus);
      for (std::size_t i = 0; i < taus.size(); ++i) {
        EXPECT_NEAR(out[i], g(taus[i]), 1e-12) << "r=" << r << " deg=" << deg;
      }
    }
  }
}

TEST(Projection, AnnihilatesNextLegendre) {
  const std::vector<double> taus{0.0, 0.2, 0.5, 0.8, 1.0};
  for (int r = 1; r <= 6; ++r) {
    const auto t = make_tableau(r);
    const auto out = projection_apply(t, [r](double x) { return oracle::shifted_legendre(r, x); }, taus);
    for (double v : out) EXPECT_NEAR(v, 0.0, 1e-12) << "r=" << r;
  }
}

TEST(Projection, RankIsExactlyR) {
  const std::vector<double> taus{0.0, 0.25, 0.5, 0.75, 1.0};
  for (int r = 1; r <= 6; ++r) {
    const auto t = make_tableau(r);
    auto g = [r](double x) { return std::pow(x, r); };
    const auto out = projection_apply(t, g, taus);
    double residual = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) residual = std::max(residual, std::abs(out[i] - g(taus[i])));
    EXPECT_GT(residual, 1e-3) << "r=" << r;
  }
}

TEST(Projection, ExponentialOntoConstants) {
  const auto t = make_tableau(1);
  const std::vector<double> taus{0.0, 0.4, 1.0};
  for (double v : projection_apply(t, [](double x) { return std::exp(x); }, taus)) {
    EXPECT_NEAR(v, std::numbers::e - 1.0, 1e-14);
  }
}

TEST(Abar, SingleStageIsPhiOne) {
  const auto t = make_tableau(1);
  const auto g = make_grid(1, 16, 2.0 * kPi);
  for (double tau : {0.5, 1.0}) {
    const auto m = abar_multiplier(t, tau, 0, g.lap_symbol(), 0.1);
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_NEAR(std::abs(m[k] - phi(1, kI * tau * 0.1 * g.lap_symbol()[k])), 0.0, 1e-15);
    }
  }
}

TEST(Abar, FinalRowIsOneAtZeroMode) {
  const auto g = make_grid(1, 8, 2.0 * kPi);
  for (int r = 1; r <= kMaxStages; ++r) {
    const auto t = make_tableau(r);
    // The monomial expansion loses digits to cancellation as r grows.
    const double tol = r <= 6 ? 1e-12 : 1e-10;
    for (int l = 0; l < r; ++l) {
      const auto m = abar_multiplier(t, 1.0, l, g.lap_symbol(), 0.1);
      EXPECT_NEAR(std::abs(m[0] - 1.0), 0.0, tol) << "r=" << r << " l=" << l;
    }
  }
}

TEST(Abar, QuadratureExample) {
  const auto t = make_tableau(2);
  const std::vector<double> lap{-1.0};
  for (int l = 0; l < 2; ++l) {
    const auto m = abar_multiplier(t, t.nodes[0], l, lap, 0.1);
    const Complex expected = abar_by_quadrature(2, t.nodes[0], t.nodes[l], -1.0, 0.1);
    EXPECT_NEAR(std::abs(m[0] - expected), 0.0, 1e-11) << "l=" << l;
  }
}

TEST(Abar, QuadratureEquivalenceOnSmallGrid) {
  const auto g = make_grid(1, 8, 2.0 * kPi);
  for (int r = 1; r <= 3; ++r) {
    const auto t = make_tableau(r);
    for (double h : {0.1, 0.01}) {
      std::vector<double> taus(t.nodes.begin(), t.nodes.end());
      taus.push_back(1.0);
      for (double tau : taus) {
        for (int l = 0; l < r; ++l) {
          const auto m = abar_multiplier(t, tau, l, g.lap_symbol(), h);
          for (std::size_t k = 0; k < g.size(); ++k) {
            const Complex expected = abar_by_quadrature(r, tau, t.nodes[l], g.lap_symbol()[k], h);
            EXPECT_NEAR(std::abs(m[k] - expected), 0.0, 1e-10)
                << "r=" << r << " h=" << h << " tau=" << tau << " l=" << l << " k=" << k;
          }
        }
      }
    }
  }
}

TEST(Abar, StageOutOfRange) {
  const auto t = make_tableau(2);
  const std::vector<double> lap{0.0, -1.0};
  EXPECT_THROW(abar_multiplier(t, 0.5, 2, lap, 0.1), std::out_of_range);
  EXPECT_THROW(abar_multiplier(t, 0.5, -1, lap, 0.1), std::out_of_range);
  const auto small = phi_table(std::vector<Complex>{0.0}, 1);
  EXPECT_THROW(abar_multiplier(t, small, 0.5, 0), std::invalid_argument);
}

TEST(OperatorSet, MatchesBruteForceOracle) {
  const auto g = make_grid(1, 8, 2.0 * kPi);
  const double h = 0.1;
  for (int r = 1; r <= 3; ++r) {
    const auto t = make_tableau(r);
    const auto ops = build_operator_set(g, t, h);
    EXPECT_EQ(ops.h, h);
    ASSERT_EQ(ops.stage_propagators.size(), static_cast<std::size_t>(r));
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double lam = g.lap_symbol()[k];
      EXPECT_NEAR(std::abs(ops.final_propagator[k] - std::exp(kI * h * lam)), 0.0, 1e-15);
      for (int s = 0; s < r; ++s) {
        EXPECT_NEAR(std::abs(ops.stage_propagators[s][k] - std::exp(kI * t.nodes[s] * h * lam)),
                    0.0, 1e-15);
        for (int l = 0; l < r; ++l) {
          EXPECT_NEAR(std::abs(ops.abar_stage[s][l][k] -
                               abar_by_quadrature(r, t.nodes[s], t.nodes[l], lam, h)),
                      0.0, 1e-10);
        }
      }
      for (int l = 0; l < r; ++l) {
        EXPECT_NEAR(std::abs(ops.abar_final[l][k] - abar_by_quadrature(r, 1.0, t.nodes[l], lam, h)),
                    0.0, 1e-10);
      }
    }
  }
}

TEST(OperatorSet, PropagatorsAreUnimodular) {
  const auto g = make_grid(1, 128, 4.0 * std::sqrt(2.0) * kPi);
  const auto ops = build_operator_set(g, make_tableau(3), 0.01);
  for (const auto& e : ops.stage_propagators) {
    for (const auto& v : e) EXPECT_NEAR(std::abs(v), 1.0, 1e-14);
  }
  for (const auto& v : ops.final_propagator) EXPECT_NEAR(std::abs(v), 1.0, 1e-14);
}

TEST(OperatorSet, ZeroModeRows) {
  const auto g = make_grid(1, 8, 2.0 * kPi);
  for (int r = 1; r <= 5; ++r) {
    const auto t = make_tableau(r);
    const auto ops = build_operator_set(g, t, 0.05);
    for (int l = 0; l < r; ++l) EXPECT_NEAR(std::abs(ops.abar_final[l][0] - 1.0), 0.0, 1e-11);
    for (int k = 0; k < r; ++k) {
      EXPECT_EQ(ops.stage_propagators[k][0], Complex(1.0));
      const double c = t.nodes[k];
      Complex weighted = 0.0;
      for (int l = 0; l < r; ++l) {
        // Zero mode: Abar_{c, sigma}(0) = sum_j psi_j(sigma) (1/c) int_0^c psi_j.
        double expected = 0.0;
        for (int j = 0; j < r; ++j) {
          const double mean = integrate_real([j](double x) { return oracle::shifted_legendre(j, x); }, 0.0, c) / c;
          expected += oracle::shifted_legendre(j, t.nodes[l]) * mean;
        }
        EXPECT_NEAR(std::abs(ops.abar_stage[k][l][0] - expected), 0.0, 1e-11) << r << k << l;
        weighted += t.weights[l] * ops.abar_stage[k][l][0];
      }
      // Quadrature consistency: the stage rows integrate constants exactly.
      EXPECT_NEAR(std::abs(weighted - 1.0), 0.0, 1e-12);
    }
  }
}

TEST(OperatorSet, RejectsNonPositiveStep) {
  const auto g = make_grid(1, 8, 2.0 * kPi);
  const auto t = make_tableau(2);
  EXPECT_THROW(build_operator_set(g, t, 0.0), std::invalid_argument);
  EXPECT_THROW(build_operator_set(g, t, -0.1), std::invalid_argument);
}

}  // namespace
}  // namespace expocol
