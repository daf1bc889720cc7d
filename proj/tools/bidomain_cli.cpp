// bidomain: adaptive multiresolution bidomain solver.
//
//   bidomain simulate --config run.ini [--mode uniform|mr|mr-lts] [--out dir]
//   bidomain compare  --run dir --reference dir
//   bidomain metrics  --run dir

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "bidomain/config.hpp"
#include "bidomain/errors.hpp"
#include "bidomain/runner.hpp"

namespace {

using namespace bidomain;

void print_metrics(const MetricsFile& m) {
  fmt::print("{:>10} {:>8} {:>9} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}\n", "time", "leaves", "eta",
             "v_L1", "v_L2", "v_Linf", "ue_L1", "ue_L2", "ue_Linf");
  for (const SnapshotMetrics& r : m.rows) {
    auto cell = [](const std::optional<ErrorNorms>& e, int k) {
      if (!e) return std::string("-");
      const double v = k == 0 ? e->l1 : k == 1 ? e->l2 : e->linf;
      return fmt::format("{:.3e}", v);
    };
    fmt::print("{:>10.5g} {:>8} {:>9.3f} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}\n", r.time, r.leaf_count,
               r.eta, cell(r.err_v, 0), cell(r.err_v, 1), cell(r.err_v, 2), cell(r.err_ue, 0),
               cell(r.err_ue, 1), cell(r.err_ue, 2));
  }
  fmt::print("nu = {}   wall clock = {:.3f} s   L = {}   N = {}   comparison level = {}\n",
             m.nu ? fmt::format("{:.3f}", *m.nu) : "n/a", m.wall_clock, m.finest_level,
             std::int64_t{1} << (2 * m.finest_level), m.comparison_level);
}

int simulate(const std::string& config_path, const std::string& mode, const std::string& out) {
  RunConfig cfg = load_config(config_path);
  if (!mode.empty()) cfg.sim.mode = parse_mode(mode);
  if (!out.empty()) cfg.output_dir = out;
  cfg.validate();
  const RunResult result = run_simulation(cfg);
  write_run(result, cfg.output_dir);
  fmt::print("mode={} L={} dt={:.6e} steps={} eps_ref={:.3e} wall_clock={:.3f}s remeshes={} mesh_changes={}\n",
             to_string(cfg.sim.mode), cfg.sim.mr.finest_level, result.dt, result.steps, result.eps_ref,
             result.wall_clock, result.remesh_count, result.mesh_changes);
  fmt::print("elliptic solves={} iterations={} max|v|={:.6g}\n", result.stats.solves,
             result.stats.iterations, result.stats.max_abs_v);
  if (!cfg.reference_run.empty()) {
    print_metrics(compare_runs(cfg.output_dir, cfg.reference_run));
  } else {
    print_metrics(metrics_of(result));
  }
  fmt::print("output written to {}\n", cfg.output_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive multiresolution finite volume solver for the bidomain equations"};
  app.require_subcommand(1);

  std::string config_path, mode, out, run_dir, reference_dir;
  auto* sim = app.add_subcommand("simulate", "Run a simulation from a configuration file");
  sim->add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
  sim->add_option("--mode", mode, "uniform | mr | mr-lts (overrides the file)")
      ->check(CLI::IsMember({"uniform", "mr", "mr-lts"}));
  sim->add_option("--out", out, "Output directory (overrides the file)");

  auto* cmp = app.add_subcommand("compare", "Errors of a run against a reference run");
  cmp->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);
  cmp->add_option("--reference", reference_dir, "Reference run directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  auto* met = app.add_subcommand("metrics", "Print the metrics of a run");
  met->add_option("--run", run_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return simulate(config_path, mode, out);
    if (cmp->parsed()) {
      print_metrics(compare_runs(run_dir, reference_dir));
      return 0;
    }
    if (met->parsed()) {
      print_metrics(read_metrics((std::filesystem::path(run_dir) / "metrics.csv").string()));
      return 0;
    }
  } catch (const InstabilityError& e) {
    fmt::print(stderr, "instability on level {} at t={:.6g}: {}\n", e.level(), e.time(), e.what());
    return 3;
  } catch (const ConvergenceError& e) {
    fmt::print(stderr, "solver failure after {} iterations (residual {:.3e}): {}\n", e.iterations(),
               e.residual(), e.what());
    return 4;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
