#include "expocol/experiments.h"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "expocol/errors.h"

namespace expocol {

using nlohmann::json;

namespace {

constexpr double kReferenceRefinement = 20.0;
constexpr double kReferenceTolerance = 1e-14;
constexpr int kReferenceMaxIter = 100;
constexpr long kDefaultDriftStride = 10;
constexpr int kCacheFormatVersion = 1;

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex_u64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

// Writes `content` to `path` through a sibling temporary and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// Runs fn(i) for i in [0, count) with at most `jobs` in flight; results keep
// index order.
template <typename Fn>
auto sweep(std::size_t count, int jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using Result = decltype(fn(std::size_t{}));
  std::vector<Result> results;
  results.reserve(count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) results.push_back(fn(i));
    return results;
  }
  for (std::size_t start = 0; start < count; start += static_cast<std::size_t>(jobs)) {
    const std::size_t stop = std::min(count, start + static_cast<std::size_t>(jobs));
    std::vector<std::future<Result>> batch;
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, fn, i));
    }
    for (auto& f : batch) results.push_back(f.get());
  }
  return results;
}

struct SweepEntry {
  Method method;
  double h;
};

std::vector<SweepEntry> sweep_entries(const ExperimentConfig& cfg) {
  std::vector<SweepEntry> entries;
  for (const auto& m : cfg.methods) {
    for (double h : cfg.stepsizes) entries.push_back({m, h});
  }
  return entries;
}

SpectralField target_solution(const ExperimentConfig& cfg, const TorusGrid& grid,
                              std::ostream& log) {
  if (auto exact = closed_form_solution(cfg, grid, cfg.t_end)) return *std::move(exact);
  if (auto cached = load_reference(cfg, log)) return *std::move(cached);
  throw MissingReferenceError("no reference solution cached for key " + reference_key(cfg) +
                              "; run the 'reference' command first");
}

void write_gnuplot(const std::filesystem::path& path, const std::string& body) {
  write_file(path, "set datafile separator ','\nset key autotitle columnhead\n" + body);
}

}  // namespace

TorusGrid grid_for(const ExperimentConfig& cfg) {
  return make_grid(cfg.grid.dim, cfg.grid.n, cfg.grid.period);
}

SpectralField plane_wave_solution(const TorusGrid& grid, double amplitude,
                                  std::span<const int> mode, double lambda, double t) {
  std::vector<double> kappa(grid.dim(), 0.0);
  double kappa2 = 0.0;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const int k = axis < static_cast<int>(mode.size()) ? mode[axis] : 0;
    kappa[axis] = 2.0 * std::numbers::pi * k / grid.period();
    kappa2 += kappa[axis] * kappa[axis];
  }
  const double omega = -(kappa2 + lambda * amplitude * amplitude);
  return SpectralField::sample(grid, [&](std::span<const double> x) {
    double phase = omega * t;
    for (std::size_t a = 0; a < x.size(); ++a) phase += kappa[a] * x[a];
    return amplitude * std::exp(Complex(0.0, phase));
  });
}

SpectralField initial_field(const ExperimentConfig& cfg, const TorusGrid& grid) {
  const InitialDatum& d = cfg.initial;
  const double wave = 2.0 * std::numbers::pi / grid.period();
  switch (d.kind) {
    case DatumKind::kCosine: {
      const double mu = wave * d.mode[0];
      return SpectralField::sample(grid, [&](std::span<const double> x) {
        return Complex(d.base + d.amplitude * std::cos(mu * x[0]));
      });
    }
    case DatumKind::kInverseSin2:
      return SpectralField::sample(grid, [&](std::span<const double> x) {
        double s = 0.0;
        for (double xi : x) {
          const double v = std::sin(wave * xi);
          s += v * v;
        }
        return Complex(1.0 / (1.0 + s));
      });
    case DatumKind::kPlaneWave:
      return plane_wave_solution(grid, d.amplitude, d.mode, cfg.lambda, 0.0);
    case DatumKind::kConstant:
      return SpectralField::sample(grid, [&](std::span<const double>) { return Complex(d.base); });
    case DatumKind::kRandom: {
      std::mt19937_64 rng(cfg.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      const int band = std::abs(d.mode[0]);
      ComplexVector coef(grid.size(), Complex(0.0));
      for (std::size_t m = 0; m < grid.size(); ++m) {
        const auto k = grid.wavenumber(m);
        if (std::any_of(k.begin(), k.end(), [&](int ki) { return std::abs(ki) > band; })) continue;
        const double re = normal(rng);
        const double im = normal(rng);
        const double kn = grid.wavenumber_norm()[m];
        coef[m] = d.amplitude * Complex(re, im) / (1.0 + kn * kn);
      }
      return to_physical(SpectralField::from_fourier(grid, std::move(coef)));
    }
  }
  throw std::logic_error("unhandled initial datum");
}

std::optional<SpectralField> closed_form_solution(const ExperimentConfig& cfg,
                                                  const TorusGrid& grid, double t) {
  if (cfg.initial.kind != DatumKind::kPlaneWave) return std::nullopt;
  return plane_wave_solution(grid, cfg.initial.amplitude, cfg.initial.mode, cfg.lambda, t);
}

StepperConfig stepper_config(const ExperimentConfig& cfg, const Method& method, double h) {
  StepperConfig s;
  s.method = method;
  s.h = h;
  s.lambda = cfg.lambda;
  s.fp_tol = cfg.fp_tol;
  s.fp_max_iter = cfg.fp_max_iter;
  s.error_alpha = cfg.alpha;
  s.dealias = cfg.dealias;
  return s;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::optional<double>> observed_orders(std::span<const double> errors,
                                                   std::span<const double> stepsizes) {
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    if (errors[i] > 0.0 && errors[i + 1] > 0.0) {
      out[i] = std::log(errors[i] / errors[i + 1]) / std::log(stepsizes[i] / stepsizes[i + 1]);
    }
  }
  return out;
}

double reference_stepsize(const ExperimentConfig& cfg) {
  return *std::min_element(cfg.stepsizes.begin(), cfg.stepsizes.end()) / kReferenceRefinement;
}

std::string reference_key(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "v" << kCacheFormatVersion << ";problem=" << problem_name(cfg.problem)
    << ";lambda=" << hex_double(cfg.lambda) << ";d=" << cfg.grid.dim << ";n=" << cfg.grid.n
    << ";period=" << hex_double(cfg.grid.period)
    << ";datum=" << static_cast<int>(cfg.initial.kind) << "," << hex_double(cfg.initial.base)
    << "," << hex_double(cfg.initial.amplitude);
  for (int k : cfg.initial.mode) s << "," << k;
  s << ";seed=" << cfg.seed << ";t_end=" << hex_double(cfg.t_end)
    << ";h_ref=" << hex_double(reference_stepsize(cfg)) << ";dealias=" << cfg.dealias;
  return hex_u64(fnv1a(s.str()));
}

std::filesystem::path reference_path(const ExperimentConfig& cfg) {
  return cfg.reference_cache_dir() / ("reference_" + reference_key(cfg) + ".json");
}

std::optional<SpectralField> load_reference(const ExperimentConfig& cfg, std::ostream& log) {
  const auto path = reference_path(cfg);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    std::ifstream in(path, std::ios::binary);
    const json doc = json::parse(in);
    const auto grid = grid_for(cfg);
    const auto& re = doc.at("re");
    const auto& im = doc.at("im");
    if (doc.at("key").get<std::string>() != reference_key(cfg) || re.size() != grid.size() ||
        im.size() != grid.size()) {
      throw std::runtime_error("metadata mismatch");
    }
    std::string digest;
    ComplexVector samples(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto a = re[j].get<std::string>();
      const auto b = im[j].get<std::string>();
      digest += a;
      digest += ',';
      digest += b;
      digest += ';';
      samples[j] = Complex(std::strtod(a.c_str(), nullptr), std::strtod(b.c_str(), nullptr));
    }
    if (doc.at("checksum").get<std::string>() != hex_u64(fnv1a(digest))) {
      throw std::runtime_error("checksum mismatch");
    }
    return to_fourier(SpectralField::from_physical(grid, std::move(samples)));
  } catch (const std::exception& e) {
    log << "warning: reference cache " << path.string() << " is corrupt (" << e.what()
        << "); recomputing\n";
    return std::nullopt;
  }
}

ReferenceResult cmd_reference(const ExperimentConfig& cfg, std::ostream& log) {
  const auto path = reference_path(cfg);
  if (auto cached = load_reference(cfg, log)) {
    return {*std::move(cached), true, path};
  }
  const auto grid = grid_for(cfg);
  StepperConfig s = stepper_config(cfg, Method::parse("ecm3"), reference_stepsize(cfg));
  s.fp_tol = kReferenceTolerance;
  s.fp_max_iter = kReferenceMaxIter;
  RunRecord record = integrate(initial_field(cfg, grid), s, cfg.t_end, 1L << 40);
  SpectralField field = to_physical(*record.final_state);

  json doc;
  doc["format"] = kCacheFormatVersion;
  doc["key"] = reference_key(cfg);
  doc["problem"] = std::string(problem_name(cfg.problem));
  doc["grid"] = {{"d", cfg.grid.dim}, {"n", cfg.grid.n}, {"period", hex_double(cfg.grid.period)}};
  doc["t_end"] = hex_double(cfg.t_end);
  doc["h_ref"] = hex_double(s.h);
  json re = json::array();
  json im = json::array();
  std::string digest;
  for (const auto& v : field.physical()) {
    const auto a = hex_double(v.real());
    const auto b = hex_double(v.imag());
    re.push_back(a);
    im.push_back(b);
    digest += a;
    digest += ',';
    digest += b;
    digest += ';';
  }
  doc["re"] = std::move(re);
  doc["im"] = std::move(im);
  doc["checksum"] = hex_u64(fnv1a(digest));
  write_atomically(path, doc.dump(1) + "\n");
  log << "reference written to " << path.string() << "\n";
  return {to_fourier(std::move(field)), false, path};
}

RunRecord cmd_run(const ExperimentConfig& cfg) {
  const auto grid = grid_for(cfg);
  const long stride = cfg.stride.value_or(1);
  RunRecord record = integrate(initial_field(cfg, grid),
                               stepper_config(cfg, cfg.methods.front(), cfg.stepsizes.front()),
                               cfg.t_end, stride);
  std::ostringstream csv;
  csv << "t,energy_err,mass_err,fp_iters\n";
  const std::size_t first = record.samples.size() > 1 ? 1 : 0;
  for (std::size_t i = first; i < record.samples.size(); ++i) {
    const auto& s = record.samples[i];
    csv << format_number(s.t) << ',' << format_number(s.energy_error) << ','
        << format_number(s.mass_error) << ',' << s.fp_iterations << '\n';
  }
  write_file(cfg.out_dir / "run.csv", csv.str());
  if (cfg.plot) {
    write_gnuplot(cfg.out_dir / "run.gp",
                  "set logscale y\nplot 'run.csv' using 1:(abs($2)) with lines title "
                  "'|energy error|'\n");
  }
  return record;
}

std::vector<ConvergenceRow> cmd_converge(const ExperimentConfig& cfg, std::ostream& log) {
  const auto grid = grid_for(cfg);
  const SpectralField target = target_solution(cfg, grid, log);
  const SpectralField u0 = initial_field(cfg, grid);
  const auto entries = sweep_entries(cfg);

  auto rows = sweep(entries.size(), cfg.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    RunRecord rec = integrate(u0, stepper_config(cfg, e.method, e.h), cfg.t_end, 1L << 40);
    const SpectralField& u = *rec.final_state;
    ConvergenceRow row;
    row.method = e.method.name();
    row.h = e.h;
    row.error = h_alpha_distance(u, target, cfg.alpha);
    row.error_l2 = h_alpha_distance(u, target, 0.0);
    row.error_h1 = h_alpha_distance(u, target, 1.0);
    row.error_max = max_distance(u, target);
    return row;
  });

  // Orders per method block.
  const std::size_t per_method = cfg.stepsizes.size();
  for (std::size_t b = 0; b < cfg.methods.size(); ++b) {
    std::vector<double> errs;
    for (std::size_t i = 0; i < per_method; ++i) errs.push_back(rows[b * per_method + i].error);
    const auto orders = observed_orders(errs, cfg.stepsizes);
    for (std::size_t i = 0; i < per_method; ++i) rows[b * per_method + i].observed_order = orders[i];
  }

  std::ostringstream csv;
  csv << "method,h,error,observed_order,error_l2,error_h1,error_max\n";
  for (const auto& r : rows) {
    csv << r.method << ',' << format_number(r.h) << ',' << format_number(r.error) << ','
        << (r.observed_order ? format_number(*r.observed_order) : "") << ','
        << format_number(r.error_l2) << ',' << format_number(r.error_h1) << ','
        << format_number(r.error_max) << '\n';
  }
  write_file(cfg.out_dir / "converge.csv", csv.str());
  if (cfg.plot) {
    std::string body = "set logscale xy\nset xlabel 'h'\nset ylabel 'error'\nplot ";
    for (std::size_t b = 0; b < cfg.methods.size(); ++b) {
      const auto name = cfg.methods[b].name();
      body += (b ? ", " : "") + std::string("'converge.csv' using (strcol(1) eq '") + name +
              "' ? $2 : NaN):3 with linespoints title '" + name + "'";
    }
    write_gnuplot(cfg.out_dir / "converge.gp", body + "\n");
  }
  return rows;
}

std::vector<DriftSeries> cmd_drift(const ExperimentConfig& cfg) {
  const auto grid = grid_for(cfg);
  const SpectralField u0 = initial_field(cfg, grid);
  const long stride = cfg.stride.value_or(kDefaultDriftStride);
  const auto entries = sweep_entries(cfg);
  const auto entry_dir = cfg.out_dir / "drift_entries";

  auto series = sweep(entries.size(), cfg.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    DriftSeries d;
    d.method = e.method.name();
    d.h = e.h;
    const double half = 0.5 * cfg.t_end;
    RunRecord rec = integrate(u0, stepper_config(cfg, e.method, e.h), cfg.t_end, 1);
    // Every step is sampled with stride 1 so the window maxima see all of
    // them; the CSV keeps every stride-th row.
    for (const auto& s : rec.samples) {
      const double err = std::abs(s.energy_error);
      if (s.t <= half) d.max_first_half = std::max(d.max_first_half, err);
      d.max_full = std::max(d.max_full, err);
      if (s.step % stride == 0 || s.step == rec.steps) {
        d.times.push_back(s.t);
        d.abs_energy_error.push_back(err);
      }
    }
    std::ostringstream csv;
    csv << "t,energy_err\n";
    for (std::size_t k = 0; k < d.times.size(); ++k) {
      csv << format_number(d.times[k]) << ',' << format_number(d.abs_energy_error[k]) << '\n';
    }
    write_file(entry_dir / (d.method + "_h" + std::to_string(i % cfg.stepsizes.size()) + ".csv"),
               csv.str());
    return d;
  });

  std::ostringstream merged;
  merged << "method,h,t,energy_err\n";
  std::ostringstream summary;
  summary << "method,h,max_first_half,max_full,ratio\n";
  for (const auto& d : series) {
    for (std::size_t k = 0; k < d.times.size(); ++k) {
      merged << d.method << ',' << format_number(d.h) << ',' << format_number(d.times[k]) << ','
             << format_number(d.abs_energy_error[k]) << '\n';
    }
    summary << d.method << ',' << format_number(d.h) << ',' << format_number(d.max_first_half)
            << ',' << format_number(d.max_full) << ','
            << format_number(d.max_first_half > 0.0 ? d.max_full / d.max_first_half : 0.0)
            << '\n';
  }
  write_file(cfg.out_dir / "drift.csv", merged.str());
  write_file(cfg.out_dir / "drift_summary.csv", summary.str());
  if (cfg.plot) {
    write_gnuplot(cfg.out_dir / "drift.gp",
                  "set logscale y\nset xlabel 't'\nset ylabel '|H(u_n)-H(u_0)|'\n"
                  "plot 'drift.csv' using 3:4 with lines title 'energy error'\n");
  }
  return series;
}

std::vector<CompareRow> cmd_compare(const ExperimentConfig& cfg, std::ostream& log) {
  const auto grid = grid_for(cfg);
  const SpectralField target = target_solution(cfg, grid, log);
  const SpectralField u0 = initial_field(cfg, grid);
  const auto entries = sweep_entries(cfg);

  auto rows = sweep(entries.size(), cfg.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    RunRecord rec = integrate(u0, stepper_config(cfg, e.method, e.h), cfg.t_end, 1L << 40);
    CompareRow row;
    row.method = e.method.name();
    row.h = e.h;
    row.error = h_alpha_distance(*rec.final_state, target, cfg.alpha);
    row.max_energy_error = rec.max_abs_energy_error;
    row.wall_seconds = rec.wall_seconds;
    row.mean_fp_iterations = rec.mean_fp_iterations;
    return row;
  });

  std::ostringstream csv;
  csv << "method,h,error,max_energy_error,wall_seconds,mean_fp_iters\n";
  for (const auto& r : rows) {
    csv << r.method << ',' << format_number(r.h) << ',' << format_number(r.error) << ','
        << format_number(r.max_energy_error) << ',' << format_number(r.wall_seconds) << ','
        << format_number(r.mean_fp_iterations) << '\n';
  }
  write_file(cfg.out_dir / "compare.csv", csv.str());
  return rows;
}

}  // namespace expocol
