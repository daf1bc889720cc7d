#pragma once

// Run orchestration, run directories and the error-versus-reference harness.
//
// A run directory holds config.ini, snapshot_NNN.csv and metrics.csv. The
// metrics file has the columns
//   time,leaf_count,eta,err_v_L1,err_v_L2,err_v_Linf,err_ue_L1,err_ue_L2,err_ue_Linf
// followed by '#'-prefixed trailer lines (nu, wall clock, levels, normalization).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bidomain/config.hpp"
#include "bidomain/snapshot.hpp"

namespace bidomain {

struct SnapshotMetrics {
  double time = 0.0;
  std::size_t leaf_count = 0;
  double eta = 0.0;
  std::optional<ErrorNorms> err_v;
  std::optional<ErrorNorms> err_ue;
};

struct RunResult {
  RunConfig config;
  double dt = 0.0;
  double eps_ref = 0.0;
  std::int64_t steps = 0;
  double wall_clock = 0.0;  // seconds spent in the stepping loop
  StepStats stats;
  std::int64_t remesh_count = 0;
  std::int64_t mesh_changes = 0;
  std::vector<Snapshot> snapshots;
  std::vector<SnapshotMetrics> metrics;
};

using StepObserver = std::function<void(const Simulation&)>;

/// Fine step index of each snapshot time: the first completed step at or
/// after round(t / dt) (advances may span several fine steps).
std::vector<std::int64_t> snapshot_steps(const std::vector<double>& times, double dt);

/// Run the configured pipeline in memory. The observer sees the simulation after every advance.
RunResult run_simulation(const RunConfig& config, const StepObserver& observer = {});

struct Comparison {
  int comparison_level = 0;
  std::vector<SnapshotMetrics> rows;
};

/// Errors of `run` against `reference`, matched by nearest snapshot time and
/// compared on the run's finest level (reference projected down by averaging).
Comparison compare_snapshots(const std::vector<Snapshot>& run, const std::vector<Snapshot>& reference,
                             const MRConfig& cfg = {});

struct MetricsFile {
  std::vector<SnapshotMetrics> rows;
  std::optional<double> nu;
  double wall_clock = 0.0;
  int finest_level = 0;
  int comparison_level = 0;
  std::string mode;
};

void write_run(const RunResult& result, const std::string& dir);
std::vector<Snapshot> read_run_snapshots(const std::string& dir);
void write_metrics(const std::string& path, const MetricsFile& metrics);
MetricsFile read_metrics(const std::string& path);
MetricsFile metrics_of(const RunResult& result);

/// Compare two run directories, rewrite the run's metrics.csv with the error
/// columns and nu (when the reference is a uniform run on the same level).
MetricsFile compare_runs(const std::string& run_dir, const std::string& reference_dir);

}  // namespace bidomain
