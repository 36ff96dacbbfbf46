#include "expocol/cli.h"

#include <CLI11.hpp>

#include <ostream>
#include <vector>

#include "expocol/errors.h"
#include "expocol/experiments.h"

namespace expocol {
namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> methods;
  std::vector<std::string> overrides;
  int jobs = 0;
  bool plot = false;
};

void add_common(CLI::App* sub, Options& opts) {
  sub->add_option("--config", opts.config_path, "experiment config (JSON)")->required();
  sub->add_option("--out", opts.out_dir, "output directory");
  sub->add_option("--method", opts.methods, "method(s): ecm<r>, strang, eavf");
  sub->add_option("--override", opts.overrides, "config override key=value");
  sub->add_option("--jobs", opts.jobs, "concurrent sweep entries")->check(CLI::PositiveNumber);
  sub->add_flag("--plot", opts.plot, "also write gnuplot scripts");
}

ExperimentConfig resolve(const Options& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (!opts.methods.empty()) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& m : opts.methods) {
      // Accept comma-separated lists as well as repeated flags.
      std::size_t start = 0;
      while (start <= m.size()) {
        const auto comma = m.find(',', start);
        const auto part = m.substr(start, comma == std::string::npos ? comma : comma - start);
        if (!part.empty()) list.push_back(part);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
    overrides.push_back("methods=" + list.dump());
  }
  if (!opts.out_dir.empty()) overrides.push_back("out_dir=" + nlohmann::json(opts.out_dir).dump());
  if (opts.jobs > 0) overrides.push_back("jobs=" + std::to_string(opts.jobs));
  if (opts.plot) overrides.push_back("plot=true");
  return load_config(opts.config_path, overrides);
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exponential collocation integrators for the cubic NLS on a torus",
               "nls-expocol"};
  app.require_subcommand(1);
  Options opts;
  auto* run = app.add_subcommand("run", "single integration, writes run.csv");
  auto* converge = app.add_subcommand("converge", "stepsize sweep, writes converge.csv");
  auto* drift = app.add_subcommand("drift", "long-horizon energy drift, writes drift.csv");
  auto* compare = app.add_subcommand("compare", "method comparison, writes compare.csv");
  auto* reference = app.add_subcommand("reference", "compute or reuse the cached reference");
  for (auto* sub : {run, converge, drift, compare, reference}) add_common(sub, opts);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size());
  for (auto it = args.rbegin(); it != args.rend(); ++it) argv_store.push_back(*it);
  try {
    app.parse(argv_store);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    const ExperimentConfig cfg = resolve(opts);
    if (run->parsed()) {
      const RunRecord rec = cmd_run(cfg);
      out << "run: " << rec.method << " h=" << format_number(rec.h) << " steps=" << rec.steps
          << " max|dH|=" << format_number(rec.max_abs_energy_error) << " -> "
          << (cfg.out_dir / "run.csv").string() << "\n";
    } else if (converge->parsed()) {
      for (const auto& r : cmd_converge(cfg, err)) {
        out << r.method << " h=" << format_number(r.h) << " error=" << format_number(r.error)
            << " order=" << (r.observed_order ? format_number(*r.observed_order) : "-") << "\n";
      }
    } else if (drift->parsed()) {
      for (const auto& d : cmd_drift(cfg)) {
        out << d.method << " h=" << format_number(d.h)
            << " max|dH| first half=" << format_number(d.max_first_half)
            << " full=" << format_number(d.max_full) << "\n";
      }
    } else if (compare->parsed()) {
      for (const auto& r : cmd_compare(cfg, err)) {
        out << r.method << " h=" << format_number(r.h) << " error=" << format_number(r.error)
            << " max|dH|=" << format_number(r.max_energy_error) << "\n";
      }
    } else if (reference->parsed()) {
      const auto ref = cmd_reference(cfg, err);
      out << (ref.cache_hit ? "cache hit: " : "computed: ") << ref.path.string() << "\n";
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidGridError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "integrator diverged at step " << e.step_index() << ": " << e.what() << "\n";
    return kExitDivergence;
  } catch (const MissingReferenceError& e) {
    err << "missing reference: " << e.what() << "\n";
    return kExitMissingReference;
  }
  return kExitOk;
}

}  // namespace expocol
