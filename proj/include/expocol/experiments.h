#ifndef EXPOCOL_EXPERIMENTS_H_
#define EXPOCOL_EXPERIMENTS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expocol/config.h"
#include "expocol/integrators.h"

namespace expocol {

TorusGrid grid_for(const ExperimentConfig& cfg);

// The configured initial datum sampled on `grid`.
SpectralField initial_field(const ExperimentConfig& cfg, const TorusGrid& grid);

// a exp(i(kappa.x + omega t)) with omega = -(|kappa|^2 + lambda a^2), an
// exact solution of the periodic cubic NLS.
SpectralField plane_wave_solution(const TorusGrid& grid, double amplitude,
                                  std::span<const int> mode, double lambda, double t);

// Exact solution at time t when the problem has one (plane-wave data).
std::optional<SpectralField> closed_form_solution(const ExperimentConfig& cfg,
                                                  const TorusGrid& grid, double t);

StepperConfig stepper_config(const ExperimentConfig& cfg, const Method& method, double h);

// 17 significant digits, the CSV float format.
std::string format_number(double v);

// log2(err[i] / err[i+1]) for consecutive halvings; the last entry is empty.
// Ratios use the actual stepsize ratio when it is not exactly 2.
std::vector<std::optional<double>> observed_orders(std::span<const double> errors,
                                                   std::span<const double> stepsizes);

// ---- reference solutions ----

// Reference stepsize: min(stepsizes) / 20.
double reference_stepsize(const ExperimentConfig& cfg);
// Content hash of everything that determines the reference field.
std::string reference_key(const ExperimentConfig& cfg);
std::filesystem::path reference_path(const ExperimentConfig& cfg);

struct ReferenceResult {
  SpectralField field;
  bool cache_hit = false;
  std::filesystem::path path;
};

// Cached field if present and intact; std::nullopt otherwise (a corrupt
// file is reported on `log`).
std::optional<SpectralField> load_reference(const ExperimentConfig& cfg, std::ostream& log);

// ECM3 at h_ref with fp_tol 1e-14 and 100 iterations, cached atomically.
// Idempotent: a valid cache entry is returned without recomputation.
ReferenceResult cmd_reference(const ExperimentConfig& cfg, std::ostream& log);

// ---- commands; each writes its CSV into cfg.out_dir ----

// First configured method and stepsize. run.csv has one row per sampled
// step (t, energy_err, mass_err, fp_iters); a zero-step run writes the
// initial state as its only row.
RunRecord cmd_run(const ExperimentConfig& cfg);

struct ConvergenceRow {
  std::string method;
  double h = 0.0;
  double error = 0.0;  // in the configured H^alpha norm
  std::optional<double> observed_order;
  double error_l2 = 0.0;
  double error_h1 = 0.0;
  double error_max = 0.0;
};

// Errors at t_end against the closed form (plane_wave) or the cached
// reference; throws MissingReferenceError when neither exists.
std::vector<ConvergenceRow> cmd_converge(const ExperimentConfig& cfg, std::ostream& log);

struct DriftSeries {
  std::string method;
  double h = 0.0;
  std::vector<double> times;
  std::vector<double> abs_energy_error;
  double max_first_half = 0.0;  // over t <= t_end/2, every step
  double max_full = 0.0;        // over the whole run, every step
};

// Energy drift |H_N(u_n) - H_N(u_0)| for every (method, stepsize), sampled
// every `stride` steps (default 10). Writes drift.csv and drift_summary.csv.
std::vector<DriftSeries> cmd_drift(const ExperimentConfig& cfg);

struct CompareRow {
  std::string method;
  double h = 0.0;
  double error = 0.0;
  double max_energy_error = 0.0;
  double wall_seconds = 0.0;
  double mean_fp_iterations = 0.0;
};

// One row per (method, stepsize); needs a reference like cmd_converge.
std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace expocol

#endif  // EXPOCOL_EXPERIMENTS_H_
