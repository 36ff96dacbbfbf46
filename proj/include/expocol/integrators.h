#ifndef EXPOCOL_INTEGRATORS_H_
#define EXPOCOL_INTEGRATORS_H_

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expocol/collocation.h"
#include "expocol/spectral_field.h"

namespace expocol {

// Time integrators for i u_t + Lap u = lambda |u|^2 u, written as
// u_t = i Lap u + i f(u) with f(u) = -lambda |u|^2 u.

enum class MethodKind { kEcm, kStrang, kEavf };

struct Method {
  MethodKind kind = MethodKind::kEcm;
  int stages = 2;  // ECM only

  // "ecm<r>" (1 <= r <= 10), "strang" or "eavf"; throws std::invalid_argument.
  static Method parse(std::string_view name);
  std::string name() const;
};

struct StepperConfig {
  Method method;
  double h = 0.01;
  double lambda = -1.0;
  // Relative L2 change of the stage values that stops the Picard iteration.
  // The defaults run every step to the iteration cap.
  double fp_tol = 1e-16;
  int fp_max_iter = 5;
  // Norm exponent used by error diagnostics.
  double error_alpha = 0.0;
  // Zero nonlinear-term modes outside the 2/3 band (ECM and EAVF).
  bool dealias = false;

  // Throws std::invalid_argument when h, fp_tol or fp_max_iter is out of range.
  void validate() const;
};

struct StepReport {
  int iterations = 0;
  double residual = 0.0;
  // Residual after each Picard sweep.
  std::vector<double> residual_history;
  double energy = 0.0;
  double mass = 0.0;
};

struct StepResult {
  SpectralField u;
  StepReport report;
};

// Picard iteration for stage vectors (Fourier coefficients). `update` maps
// the current iterate to the next one. Stops when
//   max_k ||y_k^{n+1} - y_k^n|| / ||y_k^n|| <= tol
// or after max_iter sweeps. Throws DivergenceError when an iterate is not
// finite or the residual grows three sweeps in a row above 1e-8.
struct PicardOutcome {
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};
using StageUpdate =
    std::function<void(const std::vector<ComplexVector>& current, std::vector<ComplexVector>& next)>;
PicardOutcome fixed_point_solve(std::vector<ComplexVector>& stages, const StageUpdate& update,
                                double tol, int max_iter);

// One ECMr step with Gauss-Legendre collocation:
//   y_k = E_k u + i c_k h sum_l b_l Abar_{c_k,c_l} F(y_l),
//   u+  = E u   + i h     sum_l b_l Abar_{1,c_l}   F(y_l),
// F = Fourier transform of f on the grid. Stages start from E_k u.
StepResult step_ecm(const SpectralField& u, const EcmOperatorSet& ops,
                    const CollocationTableau& tableau, const StepperConfig& cfg);

// Strang splitting: exact half-step of u_t = i f(u) (a pointwise phase
// rotation), exact linear step, exact half-step.
SpectralField step_strang(const SpectralField& u, double lambda, double h);

// Diagonal data for the exponential AVF baseline.
struct EavfOperators {
  double h = 0.0;
  ComplexVector propagator;  // e^{i h Lap}
  ComplexVector phi1;        // phi_1(i h Lap)
};
EavfOperators build_eavf_operators(const TorusGrid& grid, double h);

// u+ = e^{ih Lap} u + i h phi_1(ih Lap) int_0^1 f((1-s) u + s u+) ds, the
// integral by 4-point Gauss (exact for the cubic term), solved by Picard
// iteration from u+ = e^{ih Lap} u.
StepResult step_eavf(const SpectralField& u, const EavfOperators& ops, const StepperConfig& cfg);

// Holds the precomputed operators for one (grid, method, h) and dispatches
// to the matching step function. Immutable after construction.
class Stepper {
 public:
  Stepper(const TorusGrid& grid, const StepperConfig& cfg);

  StepResult step(const SpectralField& u) const;
  const StepperConfig& config() const { return cfg_; }

 private:
  StepperConfig cfg_;
  std::optional<CollocationTableau> tableau_;
  std::optional<EcmOperatorSet> ecm_ops_;
  std::optional<EavfOperators> eavf_ops_;
  ComplexVector strang_propagator_;
  std::vector<double> dealias_mask_;
};

struct RunSample {
  long step = 0;
  double t = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  double energy_error = 0.0;  // H_N(u_n) - H_N(u_0)
  double mass_error = 0.0;    // M(u_n) - M(u_0)
  int fp_iterations = 0;
  double fp_residual = 0.0;
};

struct RunRecord {
  std::string method;
  double h = 0.0;
  double t_end = 0.0;
  long steps = 0;
  // Initial state first, then every `stride`-th step and always the last.
  std::vector<RunSample> samples;
  std::optional<SpectralField> final_state;
  double max_abs_energy_error = 0.0;
  double max_abs_mass_error = 0.0;
  double mean_fp_iterations = 0.0;
  double wall_seconds = 0.0;
};

using StepObserver =
    std::function<void(long step, double t, const SpectralField& u, const StepReport& report)>;

// Advances u0 to t_end with steps of cfg.h; t_n = n*h. When t_end/h is not
// an integer (relative tolerance 1e-10), a final partial step uses operators
// rebuilt for the remainder. DivergenceError is rethrown with the 1-based
// step index. Throws std::invalid_argument for negative t_end or stride < 1.
RunRecord integrate(const SpectralField& u0, const StepperConfig& cfg, double t_end,
                    long stride = 1, const StepObserver& observer = {});

}  // namespace expocol

#endif  // EXPOCOL_INTEGRATORS_H_
