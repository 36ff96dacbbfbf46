#include "expocol/integrators.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "expocol/errors.h"

namespace expocol {
namespace {

constexpr double kGrowthFloor = 1e-8;
constexpr int kGrowthLimit = 3;

// 4-point Gauss-Legendre on [0, 1], used for the AVF average.
const QuadratureRule& avf_rule() {
  static const QuadratureRule rule = gauss_legendre(4);
  return rule;
}

double l2_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return std::sqrt(s);
}

bool all_finite(std::span<const Complex> v) {
  return std::all_of(v.begin(), v.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

// Fourier coefficients of f(y) = -lambda |y|^2 y for y given by its
// coefficients. `samples` is scratch of grid size.
void nonlinear_coefficients(const TorusGrid& grid, double lambda, std::span<const Complex> y,
                            std::span<const double> mask, ComplexVector& samples,
                            ComplexVector& out) {
  coefficients_to_samples(grid, y, samples);
  for (auto& s : samples) s *= -lambda * std::norm(s);
  samples_to_coefficients(grid, samples, out);
  if (!mask.empty()) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] *= mask[k];
  }
}

StepReport finish_report(const SpectralField& u, const PicardOutcome& outcome, double lambda) {
  StepReport report;
  report.iterations = outcome.iterations;
  report.residual = outcome.residual;
  report.residual_history = outcome.history;
  report.energy = energy(u, lambda);
  report.mass = mass(u);
  return report;
}

StepResult step_ecm_impl(const SpectralField& u, const EcmOperatorSet& ops,
                         const CollocationTableau& tableau, const StepperConfig& cfg,
                         std::span<const double> mask) {
  const TorusGrid& grid = u.grid();
  const auto& u_hat = u.fourier();
  const std::size_t modes = grid.size();
  const int r = tableau.r;
  const double h = ops.h;
  const double lambda = cfg.lambda;

  std::vector<ComplexVector> stages(r, ComplexVector(modes));
  for (int k = 0; k < r; ++k) {
    for (std::size_t m = 0; m < modes; ++m) stages[k][m] = ops.stage_propagators[k][m] * u_hat[m];
  }

  std::vector<ComplexVector> forcing(r, ComplexVector(modes));
  ComplexVector scratch(modes);
  auto evaluate_forcing = [&](const std::vector<ComplexVector>& y) {
    for (int l = 0; l < r; ++l) {
      nonlinear_coefficients(grid, lambda, y[l], mask, scratch, forcing[l]);
    }
  };

  const Complex i_unit(0.0, 1.0);
  StageUpdate update = [&](const std::vector<ComplexVector>& current,
                           std::vector<ComplexVector>& next) {
    evaluate_forcing(current);
    for (int k = 0; k < r; ++k) {
      const Complex scale = i_unit * tableau.nodes[k] * h;
      auto& out = next[k];
      for (std::size_t m = 0; m < modes; ++m) out[m] = ops.stage_propagators[k][m] * u_hat[m];
      for (int l = 0; l < r; ++l) {
        const Complex w = scale * tableau.weights[l];
        const auto& abar = ops.abar_stage[k][l];
        const auto& f = forcing[l];
        for (std::size_t m = 0; m < modes; ++m) out[m] += w * abar[m] * f[m];
      }
    }
  };

  const PicardOutcome outcome = fixed_point_solve(stages, update, cfg.fp_tol, cfg.fp_max_iter);

  evaluate_forcing(stages);
  ComplexVector next(modes);
  for (std::size_t m = 0; m < modes; ++m) next[m] = ops.final_propagator[m] * u_hat[m];
  for (int l = 0; l < r; ++l) {
    const Complex w = i_unit * h * tableau.weights[l];
    const auto& abar = ops.abar_final[l];
    const auto& f = forcing[l];
    for (std::size_t m = 0; m < modes; ++m) next[m] += w * abar[m] * f[m];
  }
  if (!all_finite(next)) throw DivergenceError("ECM update produced non-finite values");

  SpectralField result = to_physical(SpectralField::from_fourier(grid, std::move(next)));
  StepReport report = finish_report(result, outcome, lambda);
  return {std::move(result), std::move(report)};
}

StepResult step_eavf_impl(const SpectralField& u, const EavfOperators& ops,
                          const StepperConfig& cfg, std::span<const double> mask) {
  const TorusGrid& grid = u.grid();
  const auto& u_hat = u.fourier();
  const std::size_t modes = grid.size();
  const double lambda = cfg.lambda;
  const auto& rule = avf_rule();

  ComplexVector u_samples(modes);
  coefficients_to_samples(grid, u_hat, u_samples);

  std::vector<ComplexVector> iterate(1, ComplexVector(modes));
  for (std::size_t m = 0; m < modes; ++m) iterate[0][m] = ops.propagator[m] * u_hat[m];

  ComplexVector v_samples(modes);
  ComplexVector average(modes);
  ComplexVector forcing(modes);
  const Complex ih(0.0, ops.h);
  StageUpdate update = [&](const std::vector<ComplexVector>& current,
                           std::vector<ComplexVector>& next) {
    coefficients_to_samples(grid, current[0], v_samples);
    for (std::size_t j = 0; j < modes; ++j) {
      Complex acc(0.0);
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double s = rule.nodes[q];
        const Complex w = (1.0 - s) * u_samples[j] + s * v_samples[j];
        acc += rule.weights[q] * (-lambda * std::norm(w)) * w;
      }
      average[j] = acc;
    }
    samples_to_coefficients(grid, average, forcing);
    if (!mask.empty()) {
      for (std::size_t m = 0; m < modes; ++m) forcing[m] *= mask[m];
    }
    for (std::size_t m = 0; m < modes; ++m) {
      next[0][m] = ops.propagator[m] * u_hat[m] + ih * ops.phi1[m] * forcing[m];
    }
  };

  const PicardOutcome outcome = fixed_point_solve(iterate, update, cfg.fp_tol, cfg.fp_max_iter);
  SpectralField result = to_physical(SpectralField::from_fourier(grid, std::move(iterate[0])));
  StepReport report = finish_report(result, outcome, lambda);
  return {std::move(result), std::move(report)};
}

ComplexVector linear_propagator(const TorusGrid& grid, double h) {
  const auto& lap = grid.lap_symbol();
  ComplexVector e(lap.size());
  for (std::size_t k = 0; k < lap.size(); ++k) e[k] = std::exp(Complex(0.0, h * lap[k]));
  return e;
}

SpectralField strang_impl(const SpectralField& u, double lambda, double h,
                          std::span<const Complex> propagator) {
  const TorusGrid& grid = u.grid();
  const std::size_t modes = grid.size();
  const SpectralField start = to_physical(u);
  ComplexVector samples = start.physical();
  // u_t = -i lambda |u|^2 u keeps |u| fixed, so the flow is a phase rotation.
  auto half_nonlinear = [&](ComplexVector& s) {
    for (auto& v : s) v *= std::exp(Complex(0.0, -0.5 * lambda * h * std::norm(v)));
  };
  half_nonlinear(samples);
  ComplexVector coef(modes);
  samples_to_coefficients(grid, samples, coef);
  for (std::size_t k = 0; k < modes; ++k) coef[k] *= propagator[k];
  coefficients_to_samples(grid, coef, samples);
  half_nonlinear(samples);
  if (!all_finite(samples)) throw DivergenceError("Strang step produced non-finite values");
  return to_fourier(SpectralField::from_physical(grid, std::move(samples)));
}

}  // namespace

Method Method::parse(std::string_view name) {
  if (name == "strang") return {MethodKind::kStrang, 0};
  if (name == "eavf") return {MethodKind::kEavf, 0};
  if (name.starts_with("ecm") && name.size() > 3) {
    const std::string digits(name.substr(3));
    if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
        digits.size() <= 2) {
      const int r = std::stoi(digits);
      if (r >= 1 && r <= kMaxStages) return {MethodKind::kEcm, r};
    }
  }
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected ecm1..ecm10, strang or eavf)");
}

std::string Method::name() const {
  switch (kind) {
    case MethodKind::kEcm:
      return "ecm" + std::to_string(stages);
    case MethodKind::kStrang:
      return "strang";
    case MethodKind::kEavf:
      return "eavf";
  }
  return "unknown";
}

void StepperConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("stepsize must be positive");
  if (!(fp_tol > 0.0)) throw std::invalid_argument("fp_tol must be positive");
  if (fp_max_iter < 1) throw std::invalid_argument("fp_max_iter must be >= 1");
  if (error_alpha < 0.0) throw std::invalid_argument("error_alpha must be non-negative");
  if (method.kind == MethodKind::kEcm && (method.stages < 1 || method.stages > kMaxStages)) {
    throw std::invalid_argument("ECM stage count out of range");
  }
}

PicardOutcome fixed_point_solve(std::vector<ComplexVector>& stages, const StageUpdate& update,
                                double tol, int max_iter) {
  PicardOutcome outcome;
  std::vector<ComplexVector> next = stages;
  int growth_streak = 0;
  for (int iter = 1; iter <= max_iter; ++iter) {
    update(stages, next);
    double residual = 0.0;
    for (std::size_t k = 0; k < stages.size(); ++k) {
      if (!all_finite(next[k])) {
        throw DivergenceError("fixed-point iterate is not finite (stepsize too large?)");
      }
      double diff = 0.0;
      for (std::size_t m = 0; m < next[k].size(); ++m) diff += std::norm(next[k][m] - stages[k][m]);
      diff = std::sqrt(diff);
      const double base = l2_norm(stages[k]);
      residual = std::max(residual, base > 0.0 ? diff / base : diff);
    }
    if (!outcome.history.empty() && residual > outcome.history.back() && residual > kGrowthFloor) {
      if (++growth_streak >= kGrowthLimit) {
        throw DivergenceError("fixed-point residual grew " + std::to_string(kGrowthLimit) +
                              " sweeps in a row (stepsize too large?)");
      }
    } else {
      growth_streak = 0;
    }
    std::swap(stages, next);
    outcome.iterations = iter;
    outcome.residual = residual;
    outcome.history.push_back(residual);
    if (residual <= tol) break;
  }
  return outcome;
}

StepResult step_ecm(const SpectralField& u, const EcmOperatorSet& ops,
                    const CollocationTableau& tableau, const StepperConfig& cfg) {
  const SpectralField start = to_fourier(u);
  std::vector<double> mask;
  if (cfg.dealias) mask = two_thirds_mask(u.grid());
  return step_ecm_impl(start, ops, tableau, cfg, mask);
}

SpectralField step_strang(const SpectralField& u, double lambda, double h) {
  return strang_impl(u, lambda, h, linear_propagator(u.grid(), h));
}

EavfOperators build_eavf_operators(const TorusGrid& grid, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("stepsize must be positive");
  EavfOperators ops;
  ops.h = h;
  const auto& lap = grid.lap_symbol();
  ComplexVector args(lap.size());
  for (std::size_t k = 0; k < lap.size(); ++k) args[k] = Complex(0.0, h * lap[k]);
  auto table = phi_table(args, 1);
  ops.propagator = std::move(table.values[0]);
  ops.phi1 = std::move(table.values[1]);
  return ops;
}

StepResult step_eavf(const SpectralField& u, const EavfOperators& ops, const StepperConfig& cfg) {
  const SpectralField start = to_fourier(u);
  std::vector<double> mask;
  if (cfg.dealias) mask = two_thirds_mask(u.grid());
  return step_eavf_impl(start, ops, cfg, mask);
}

Stepper::Stepper(const TorusGrid& grid, const StepperConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.dealias) dealias_mask_ = two_thirds_mask(grid);
  switch (cfg_.method.kind) {
    case MethodKind::kEcm:
      tableau_ = make_tableau(cfg_.method.stages);
      ecm_ops_ = build_operator_set(grid, *tableau_, cfg_.h);
      break;
    case MethodKind::kEavf:
      eavf_ops_ = build_eavf_operators(grid, cfg_.h);
      break;
    case MethodKind::kStrang:
      strang_propagator_ = linear_propagator(grid, cfg_.h);
      break;
  }
}

StepResult Stepper::step(const SpectralField& u) const {
  const SpectralField start = to_fourier(u);
  switch (cfg_.method.kind) {
    case MethodKind::kEcm:
      return step_ecm_impl(start, *ecm_ops_, *tableau_, cfg_, dealias_mask_);
    case MethodKind::kEavf:
      return step_eavf_impl(start, *eavf_ops_, cfg_, dealias_mask_);
    case MethodKind::kStrang: {
      SpectralField next = strang_impl(start, cfg_.lambda, cfg_.h, strang_propagator_);
      PicardOutcome none;
      StepReport report = finish_report(next, none, cfg_.lambda);
      return {std::move(next), std::move(report)};
    }
  }
  throw std::logic_error("unhandled method");
}

RunRecord integrate(const SpectralField& u0, const StepperConfig& cfg, double t_end, long stride,
                    const StepObserver& observer) {
  cfg.validate();
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("t_end must be non-negative");
  }
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");

  const auto clock_start = std::chrono::steady_clock::now();
  const double ratio = t_end / cfg.h;
  long full_steps = std::lround(ratio);
  double remainder = 0.0;
  if (std::abs(ratio - static_cast<double>(full_steps)) > 1e-10 * std::max(1.0, ratio)) {
    full_steps = static_cast<long>(std::floor(ratio));
    remainder = t_end - static_cast<double>(full_steps) * cfg.h;
  }
  const long total_steps = full_steps + (remainder > 0.0 ? 1 : 0);

  RunRecord record;
  record.method = cfg.method.name();
  record.h = cfg.h;
  record.t_end = t_end;
  record.steps = total_steps;

  SpectralField u = to_physical(to_fourier(u0));
  const double e0 = energy(u, cfg.lambda);
  const double m0 = mass(u);
  RunSample initial;
  initial.energy = e0;
  initial.mass = m0;
  record.samples.push_back(initial);

  const Stepper stepper(u.grid(), cfg);
  std::optional<Stepper> tail;
  if (remainder > 0.0) {
    StepperConfig tail_cfg = cfg;
    tail_cfg.h = remainder;
    tail.emplace(u.grid(), tail_cfg);
  }

  long iteration_total = 0;
  for (long n = 1; n <= total_steps; ++n) {
    const bool is_tail = n > full_steps;
    StepResult result = [&] {
      try {
        return is_tail ? tail->step(u) : stepper.step(u);
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " at step " + std::to_string(n), n);
      }
    }();
    u = std::move(result.u);
    const double t = is_tail ? t_end : static_cast<double>(n) * cfg.h;
    const double de = result.report.energy - e0;
    const double dm = result.report.mass - m0;
    record.max_abs_energy_error = std::max(record.max_abs_energy_error, std::abs(de));
    record.max_abs_mass_error = std::max(record.max_abs_mass_error, std::abs(dm));
    iteration_total += result.report.iterations;
    if (n % stride == 0 || n == total_steps) {
      RunSample s;
      s.step = n;
      s.t = t;
      s.energy = result.report.energy;
      s.mass = result.report.mass;
      s.energy_error = de;
      s.mass_error = dm;
      s.fp_iterations = result.report.iterations;
      s.fp_residual = result.report.residual;
      record.samples.push_back(s);
    }
    if (observer) observer(n, t, u, result.report);
  }
  record.mean_fp_iterations =
      total_steps > 0 ? static_cast<double>(iteration_total) / static_cast<double>(total_steps)
                      : 0.0;
  record.final_state = std::move(u);
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_start).count();
  return record;
}

}  // namespace expocol
