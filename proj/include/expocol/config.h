#ifndef EXPOCOL_CONFIG_H_
#define EXPOCOL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "expocol/integrators.h"

namespace expocol {

enum class Problem { kTestOne, kTestTwo, kPlaneWave, kCustom };

std::string_view problem_name(Problem p);

struct GridSpec {
  int dim = 1;
  int n = 64;
  double period = 0.0;
};

// Initial datum families. Coordinates x = (x_0, ..., x_{d-1}) in [0, L)^d.
//   cosine:      base + amplitude cos(2 pi mode_0 x_0 / L)
//   inverse_sin2: 1 / (1 + sum_i sin(2 pi x_i / L)^2)
//   plane_wave:  amplitude exp(i kappa(mode).x)
//   constant:    base
//   random:      seeded, amplitude * sum over |k_i| <= mode_0 of
//                (normal + i normal) exp(i kappa(k).x) / (1 + |k|^2)
enum class DatumKind { kCosine, kInverseSin2, kPlaneWave, kConstant, kRandom };

struct InitialDatum {
  DatumKind kind = DatumKind::kConstant;
  double base = 0.0;
  double amplitude = 0.0;
  std::vector<int> mode{1};
};

struct ExperimentConfig {
  Problem problem = Problem::kCustom;
  double lambda = -1.0;
  GridSpec grid;
  InitialDatum initial;
  std::vector<Method> methods;
  std::vector<double> stepsizes;  // strictly decreasing
  double t_end = 1.0;
  std::filesystem::path out_dir = "out";
  std::optional<std::filesystem::path> cache_dir;  // default: out_dir/reference_cache
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double fp_tol = 1e-16;
  int fp_max_iter = 5;
  std::optional<long> stride;
  bool dealias = false;
  int jobs = 1;
  bool plot = false;

  std::filesystem::path reference_cache_dir() const;
};

// Evaluates "4*sqrt(2)*pi"-style expressions: numbers, pi, sqrt(), + - * /,
// unary minus and parentheses. Throws ConfigError.
double evaluate_expression(std::string_view text);

// Builds a validated configuration: problem preset defaults first, then the
// explicit keys. Unknown keys and schema violations throw ConfigError naming
// the offending field.
ExperimentConfig config_from_json(const nlohmann::json& doc);

// Applies "dotted.key=value" overrides in place; the value is parsed as
// JSON when possible and kept as a string otherwise.
void apply_overrides(nlohmann::json& doc, std::span<const std::string> overrides);

// Reads, overrides and validates. Parse errors report the line number.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> overrides = {});

}  // namespace expocol

#endif  // EXPOCOL_CONFIG_H_
