#include "bidomain/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bidomain/errors.hpp"

namespace bidomain {

namespace fs = std::filesystem;

std::vector<std::int64_t> snapshot_steps(const std::vector<double>& times, double dt) {
  std::vector<std::int64_t> steps;
  steps.reserve(times.size());
  for (double t : times) steps.push_back(std::llround(t / dt));
  return steps;
}

RunResult run_simulation(const RunConfig& config, const StepObserver& observer) {
  config.validate();
  RunResult result;
  result.config = config;
  Simulation sim(config.sim);
  result.dt = sim.dt();
  result.eps_ref = sim.eps_ref();

  const std::int64_t chunk = sim.steps_per_advance();
  std::int64_t total = std::max<std::int64_t>(1, std::llround(config.t_final / sim.dt()));
  total = (total + chunk - 1) / chunk * chunk;

  std::vector<std::int64_t> targets = snapshot_steps(config.snapshot_times, sim.dt());
  std::sort(targets.begin(), targets.end());
  std::size_t next = 0;
  auto capture = [&] {
    bool taken = false;
    while (next < targets.size() && targets[next] <= sim.step()) {
      if (!taken) result.snapshots.push_back(sim.snapshot());
      taken = true;
      ++next;
    }
  };
  capture();
  std::chrono::duration<double> busy{0.0};
  while (sim.step() < total) {
    const auto start = std::chrono::steady_clock::now();
    try {
      sim.advance();
    } catch (const InstabilityError& e) {
      throw InstabilityError(fmt::format("{} (t = {:.6g})", e.what(), e.time()), e.level(), e.time());
    }
    busy += std::chrono::steady_clock::now() - start;
    if (observer) observer(sim);
    capture();
  }
  while (next < targets.size()) {
    result.snapshots.push_back(sim.snapshot());
    ++next;
  }
  result.wall_clock = busy.count();
  result.steps = sim.step();
  result.stats = sim.stats();
  result.remesh_count = sim.remesh_count();
  result.mesh_changes = sim.mesh_changes();

  const int L = config.sim.mr.finest_level;
  for (const Snapshot& s : result.snapshots) {
    SnapshotMetrics m;
    m.time = s.time;
    m.leaf_count = s.leaves.size();
    m.eta = compression_rate(std::ldexp(1.0, 2 * L), L, m.leaf_count);
    result.metrics.push_back(m);
  }
  return result;
}

Comparison compare_snapshots(const std::vector<Snapshot>& run, const std::vector<Snapshot>& reference,
                             const MRConfig& cfg) {
  if (run.empty()) throw HarnessError("run has no snapshots");
  if (reference.empty()) throw HarnessError("reference has no snapshots");
  Comparison out;
  out.comparison_level = run.front().finest_level;
  for (const Snapshot& s : run) {
    if (s.finest_level != out.comparison_level) throw HarnessError("run snapshots disagree on L");
    const auto best = std::min_element(reference.begin(), reference.end(), [&](const auto& a, const auto& b) {
      return std::abs(a.time - s.time) < std::abs(b.time - s.time);
    });
    const double tolerance = 1e-3 * std::max(std::abs(s.time), 1e-3);
    if (std::abs(best->time - s.time) > tolerance) {
      throw HarnessError(fmt::format("no reference snapshot near t={} (closest t={})", s.time, best->time));
    }
    if (best->finest_level < out.comparison_level) {
      throw HarnessError(fmt::format("reference level {} is coarser than the run level {}",
                                     best->finest_level, out.comparison_level));
    }
    SnapshotMetrics m;
    m.time = s.time;
    m.leaf_count = s.leaves.size();
    m.eta = compression_rate(std::ldexp(1.0, 2 * out.comparison_level), out.comparison_level, m.leaf_count);
    ErrorNorms norms[2];
    for (int c = 0; c < 2; ++c) {
      const auto component = c == 0 ? Component::V : Component::Ue;
      const LevelField a = snapshot_field(s, component, out.comparison_level, cfg);
      const LevelField b = snapshot_field(*best, component, out.comparison_level, cfg);
      norms[c] = error_norms(a, b);
    }
    m.err_v = norms[0];
    m.err_ue = norms[1];
    out.rows.push_back(m);
  }
  return out;
}

MetricsFile metrics_of(const RunResult& result) {
  MetricsFile m;
  m.rows = result.metrics;
  m.wall_clock = result.wall_clock;
  m.finest_level = result.config.sim.mr.finest_level;
  m.comparison_level = m.finest_level;
  m.mode = to_string(result.config.sim.mode);
  return m;
}

void write_metrics(const std::string& path, const MetricsFile& metrics) {
  std::ofstream out(path);
  if (!out) throw HarnessError(fmt::format("cannot write metrics {}", path));
  auto num = [](double v) { return std::isnan(v) ? std::string("nan") : fmt::format("{:.6e}", v); };
  out << "time,leaf_count,eta,err_v_L1,err_v_L2,err_v_Linf,err_ue_L1,err_ue_L2,err_ue_Linf\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SnapshotMetrics& r : metrics.rows) {
    const ErrorNorms v = r.err_v.value_or(ErrorNorms{nan, nan, nan});
    const ErrorNorms u = r.err_ue.value_or(ErrorNorms{nan, nan, nan});
    fmt::print(out, "{},{},{:.4f},{},{},{},{},{},{}\n", r.time, r.leaf_count, r.eta, num(v.l1),
               num(v.l2), num(v.linf), num(u.l1), num(u.l2), num(u.linf));
  }
  fmt::print(out, "# nu={}\n", metrics.nu ? fmt::format("{:.4f}", *metrics.nu) : "nan");
  fmt::print(out, "# wall_clock_s={:.6f}\n", metrics.wall_clock);
  fmt::print(out, "# finest_level={} N={}\n", metrics.finest_level,
             std::int64_t{1} << (2 * metrics.finest_level));
  fmt::print(out, "# comparison_level={} normalization=reference\n", metrics.comparison_level);
  fmt::print(out, "# mode={}\n", metrics.mode);
}

MetricsFile read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError(fmt::format("cannot read metrics {}", path));
  MetricsFile m;
  std::string line;
  int number = 0;
  auto value = [&](const std::string& token) {
    if (token == "nan") return std::numeric_limits<double>::quiet_NaN();
    try {
      return std::stod(token);
    } catch (const std::exception&) {
      throw HarnessError(fmt::format("{}:{}: '{}' is not a number", path, number, token));
    }
  };
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line.rfind("time,", 0) == 0) continue;
    if (line[0] == '#') {
      std::istringstream words(line.substr(1));
      std::string word;
      while (words >> word) {
        const auto eq = word.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = word.substr(0, eq);
        const std::string val = word.substr(eq + 1);
        if (key == "nu" && val != "nan") m.nu = value(val);
        if (key == "wall_clock_s") m.wall_clock = value(val);
        if (key == "finest_level") m.finest_level = int(value(val));
        if (key == "comparison_level") m.comparison_level = int(value(val));
        if (key == "mode") m.mode = val;
      }
      continue;
    }
    std::vector<std::string> f;
    std::istringstream row(line);
    std::string token;
    while (std::getline(row, token, ',')) f.push_back(token);
    if (f.size() != 9) throw HarnessError(fmt::format("{}:{}: expected 9 columns", path, number));
    SnapshotMetrics r;
    r.time = value(f[0]);
    r.leaf_count = std::size_t(value(f[1]));
    r.eta = value(f[2]);
    if (!std::isnan(value(f[3]))) {
      r.err_v = ErrorNorms{value(f[3]), value(f[4]), value(f[5])};
      r.err_ue = ErrorNorms{value(f[6]), value(f[7]), value(f[8])};
    }
    m.rows.push_back(r);
  }
  return m;
}

void write_run(const RunResult& result, const std::string& dir) {
  fs::create_directories(dir);
  save_config(result.config, (fs::path(dir) / "config.ini").string());
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    write_snapshot_file((fs::path(dir) / fmt::format("snapshot_{:03d}.csv", k)).string(),
                        result.snapshots[k]);
  }
  write_metrics((fs::path(dir) / "metrics.csv").string(), metrics_of(result));
}

std::vector<Snapshot> read_run_snapshots(const std::string& dir) {
  if (!fs::is_directory(dir)) throw HarnessError(fmt::format("{} is not a run directory", dir));
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("snapshot_", 0) == 0 && entry.path().extension() == ".csv") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Snapshot> out;
  for (const auto& f : files) out.push_back(read_snapshot_file(f));
  return out;
}

MetricsFile compare_runs(const std::string& run_dir, const std::string& reference_dir) {
  MRConfig cfg;
  const fs::path config_path = fs::path(run_dir) / "config.ini";
  if (fs::exists(config_path)) cfg = load_config(config_path.string()).sim.mr;
  const Comparison cmp =
      compare_snapshots(read_run_snapshots(run_dir), read_run_snapshots(reference_dir), cfg);

  MetricsFile run_metrics;
  const fs::path metrics_path = fs::path(run_dir) / "metrics.csv";
  if (fs::exists(metrics_path)) run_metrics = read_metrics(metrics_path.string());
  run_metrics.rows = cmp.rows;
  run_metrics.comparison_level = cmp.comparison_level;
  if (run_metrics.finest_level == 0) run_metrics.finest_level = cmp.comparison_level;

  const fs::path ref_metrics_path = fs::path(reference_dir) / "metrics.csv";
  run_metrics.nu.reset();
  if (fs::exists(ref_metrics_path)) {
    const MetricsFile ref = read_metrics(ref_metrics_path.string());
    if (ref.mode == "uniform" && ref.finest_level == run_metrics.finest_level &&
        run_metrics.wall_clock > 0.0) {
      run_metrics.nu = ref.wall_clock / run_metrics.wall_clock;
    }
  }
  write_metrics(metrics_path.string(), run_metrics);
  return run_metrics;
}

}  // namespace bidomain
