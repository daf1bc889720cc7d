#pragma once

// Time integration drivers: plain finite volumes on the uniform finest grid,
// the adaptive scheme with a global time step, and the adaptive scheme with
// local time stepping.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bidomain/elliptic.hpp"
#include "bidomain/fv.hpp"
#include "bidomain/lts.hpp"
#include "bidomain/model.hpp"
#include "bidomain/multires.hpp"
#include "bidomain/tree.hpp"

namespace bidomain {

enum class Mode { Uniform, MR, MRLts };

std::string to_string(Mode mode);
/// Throws ConfigError for unknown names.
Mode parse_mode(const std::string& name);

struct SimulationOptions {
  Mode mode = Mode::MR;
  ModelParams model;
  StimulusProtocol stimulus;
  MRConfig mr;
  double cfl_factor = 0.5;
  int remesh_interval = 2;
  EllipticCadence cadence = EllipticCadence::EveryFineStep;
  SolverOptions solver;
  /// Overrides the CFL-derived time step when positive.
  double dt_override = 0.0;

  friend bool operator==(const SimulationOptions&, const SimulationOptions&) = default;
};

struct LeafRecord {
  CellIndex cell;
  double v = 0.0;
  double ue = 0.0;
  double w = 0.0;
};

struct Snapshot {
  double time = 0.0;
  std::int64_t step = 0;
  int finest_level = 0;
  Mode mode = Mode::Uniform;
  std::vector<LeafRecord> leaves;
};

class Simulation {
 public:
  explicit Simulation(const SimulationOptions& options);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const SimulationOptions& options() const { return options_; }
  double dt() const { return dt_; }
  double eps_ref() const { return eps_ref_; }
  std::int64_t step() const { return step_; }
  double time() const { return double(step_) * dt_; }
  /// Fine steps covered by one call to advance().
  std::int64_t steps_per_advance() const;

  void advance();
  Snapshot snapshot() const;

  std::size_t leaf_count() const { return mesh_.size(); }
  double compression() const;
  const FvMesh& mesh() const { return mesh_; }
  const FieldState& state() const { return state_; }
  const MRTree* tree() const { return tree_ ? &*tree_ : nullptr; }
  const StepStats& stats() const { return stepper_.stats(); }
  std::int64_t remesh_count() const { return remesh_count_; }
  std::int64_t mesh_changes() const { return mesh_changes_; }

 private:
  void rebuild_from_tree();
  void remesh();

  SimulationOptions options_;
  FvStepper stepper_;
  std::optional<MRTree> tree_;
  FvMesh mesh_;
  FieldState state_;
  std::unique_ptr<LtsStepper> lts_;
  double dt_ = 0.0;
  double eps_ref_ = 0.0;
  std::int64_t step_ = 0;
  std::int64_t last_remesh_ = 0;
  std::int64_t remesh_count_ = 0;
  std::int64_t mesh_changes_ = 0;
};

/// Initial cell averages on the uniform level-L grid in Z order.
FieldState initial_fine_state(int level, const StimulusProtocol& stimulus);

}  // namespace bidomain
