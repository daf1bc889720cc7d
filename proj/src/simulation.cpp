#include "bidomain/simulation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bidomain/errors.hpp"
#include "bidomain/leaf_mesh.hpp"

namespace bidomain {

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Uniform:
      return "uniform";
    case Mode::MR:
      return "mr";
    case Mode::MRLts:
      return "mr-lts";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  if (name == "uniform") return Mode::Uniform;
  if (name == "mr") return Mode::MR;
  if (name == "mr-lts") return Mode::MRLts;
  throw ConfigError(fmt::format("unknown mode '{}' (expected uniform, mr or mr-lts)", name));
}

FieldState initial_fine_state(int level, const StimulusProtocol& stimulus) {
  FieldState state;
  const auto cells = z_order_cells(level);
  state.v.reserve(cells.size());
  state.w.reserve(cells.size());
  for (const CellIndex& c : cells) {
    const InitialValues init = initial_cell_average(geometry(c), stimulus);
    state.v.push_back(init.v);
    state.w.push_back(init.w);
  }
  state.ue.assign(cells.size(), 0.0);
  return state;
}

Simulation::Simulation(const SimulationOptions& options)
    : options_(options), stepper_(options.model, options.stimulus, options.solver) {
  options_.stimulus.validate();
  options_.mr.validate();
  if (!(options_.cfl_factor > 0.0)) throw ParameterError("cfl_factor must be positive");
  if (options_.remesh_interval < 1) throw ParameterError("remesh_interval must be at least 1");

  const int L = options_.mr.finest_level;
  FvMesh fine_mesh = make_uniform_mesh(L, options_.model);
  FieldState fine = initial_fine_state(L, options_.stimulus);
  const auto iapp_span = stepper_.applied_current(fine_mesh, 0.0);
  const std::vector<double> iapp0(iapp_span.begin(), iapp_span.end());
  const double reaction = reaction_max(fine, iapp0, options_.model);
  const double tensor = tensor_norm_max(options_.model);
  dt_ = options_.dt_override > 0.0
            ? options_.dt_override
            : options_.cfl_factor * cfl_bound(reaction, tensor, std::ldexp(1.0, -L));
  eps_ref_ = effective_eps_ref(options_.mr, reaction, tensor);
  stepper_.solve_ue(fine_mesh, fine, iapp0);

  if (options_.mode == Mode::Uniform) {
    mesh_ = std::move(fine_mesh);
    state_ = std::move(fine);
    return;
  }
  std::vector<Values> values(fine.size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = {fine.v[k], fine.ue[k], fine.w[k]};
  tree_.emplace(MRTree::uniform(options_.mr, L, values));
  tree_->remesh(eps_ref_);
  rebuild_from_tree();
  stepper_.invalidate_history();
  stepper_.solve_ue(mesh_, state_, stepper_.applied_current(mesh_, 0.0));
  if (options_.mode == Mode::MRLts) {
    lts_ = std::make_unique<LtsStepper>(stepper_, options_.cadence);
  }
}

std::int64_t Simulation::steps_per_advance() const {
  if (options_.mode != Mode::MRLts) return 1;
  return std::int64_t{1} << (options_.mr.finest_level - options_.mr.min_level);
}

void Simulation::advance() {
  if (options_.mode == Mode::MRLts) {
    LtsSchedule schedule{options_.mr.finest_level, options_.mr.min_level, dt_,
                         options_.remesh_interval};
    lts_->advance_cycle(mesh_, state_, schedule, step_);
    step_ += schedule.cycle_steps();
  } else {
    stepper_.step(mesh_, state_, time(), dt_);
    ++step_;
  }
  if (tree_ && step_ - last_remesh_ >= options_.remesh_interval) remesh();
}

void Simulation::remesh() {
  for (std::size_t k = 0; k < mesh_.size(); ++k) {
    tree_->set_values(mesh_.cells[k], {state_.v[k], state_.ue[k], state_.w[k]});
  }
  const RemeshReport report = tree_->remesh(eps_ref_);
  ++remesh_count_;
  last_remesh_ = step_;
  if (!report.changed()) return;
  ++mesh_changes_;
  rebuild_from_tree();
  stepper_.invalidate_history();
  stepper_.solve_ue(mesh_, state_, stepper_.applied_current(mesh_, time()));
}

void Simulation::rebuild_from_tree() {
  mesh_ = compile_leaf_mesh(*tree_, options_.model);
  const std::size_t n = mesh_.size();
  state_.v.resize(n);
  state_.ue.resize(n);
  state_.w.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Values& u = tree_->find(mesh_.cells[k])->u;
    state_.v[k] = u[0];
    state_.ue[k] = u[1];
    state_.w[k] = u[2];
  }
}

double Simulation::compression() const {
  const int L = options_.mr.finest_level;
  return compression_rate(std::ldexp(1.0, 2 * L), L, leaf_count());
}

Snapshot Simulation::snapshot() const {
  Snapshot snap;
  snap.time = time();
  snap.step = step_;
  snap.finest_level = options_.mr.finest_level;
  snap.mode = options_.mode;
  snap.leaves.reserve(mesh_.size());
  for (std::size_t k = 0; k < mesh_.size(); ++k) {
    snap.leaves.push_back({mesh_.cells[k], state_.v[k], state_.ue[k], state_.w[k]});
  }
  return snap;
}

}  // namespace bidomain
