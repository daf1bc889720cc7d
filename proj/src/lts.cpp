#include "bidomain/lts.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

double dt_for_level(int level, int finest_level, double dt_finest) {
  if (level < 0 || level > finest_level) {
    throw IndexError(fmt::format("level {} outside [0, {}]", level, finest_level));
  }
  return std::ldexp(dt_finest, finest_level - level);
}

double face_flux(const FvMesh& mesh, const FvFace& face, double transmissibility,
                 std::span<const double> u) {
  return transmissibility * (mesh.opposite_value(face, u) - u[std::size_t(face.a)]);
}

double interface_flux(std::span<const double> fine_fluxes) {
  return -std::accumulate(fine_fluxes.begin(), fine_fluxes.end(), 0.0);
}

double InterfaceFluxLedger::sum() const { return std::accumulate(acc_.begin(), acc_.end(), 0.0); }

void LtsStepper::advance_cycle(const FvMesh& mesh, FieldState& state, const LtsSchedule& schedule,
                               std::int64_t step0) {
  const ModelParams& p = stepper_.params();
  const std::size_t n = mesh.size();
  const std::int64_t cycle = schedule.cycle_steps();
  const double tensor_norm = tensor_norm_max(p);
  for (const CellIndex& c : mesh.cells) {
    if (c.level < schedule.coarsest_level || c.level > schedule.finest_level) {
      throw InvariantError(fmt::format("leaf level {} outside the schedule [{}, {}]", c.level,
                                       schedule.coarsest_level, schedule.finest_level));
    }
  }
  ledger_.reset(n);
  iapp_start_.assign(n, 0.0);
  std::vector<double> level_reaction(std::size_t(schedule.finest_level) + 1);

  for (std::int64_t k = 0; k < cycle; ++k) {
    const double t = double(step0 + k) * schedule.dt_finest;
    const auto iapp = stepper_.applied_current(mesh, t);

    std::fill(level_reaction.begin(), level_reaction.end(), -1.0);
    for (std::size_t c = 0; c < n; ++c) {
      const int l = mesh.cells[c].level;
      if (!schedule.starts_step(l, k)) continue;
      iapp_start_[c] = iapp[c];
      const double ion = p.reaction ? std::abs(i_ion(state.v[c], state.w[c], p)) : 0.0;
      level_reaction[std::size_t(l)] =
          std::max(level_reaction[std::size_t(l)], ion + 2.0 * std::abs(iapp[c]));
    }
    for (int l = schedule.coarsest_level; l <= schedule.finest_level; ++l) {
      if (level_reaction[std::size_t(l)] < 0.0) continue;
      const double h = std::ldexp(1.0, -l);
      const double bound = cfl_bound(level_reaction[std::size_t(l)], tensor_norm, h);
      if (schedule.dt(l) > bound * (1.0 + 1e-12)) {
        throw InstabilityError(fmt::format("CFL violation on level {}: dt_l = {:.6e} exceeds "
                                           "the stability bound {:.6e}",
                                           l, schedule.dt(l), bound),
                               l, t);
      }
    }

    for (const FvFace& f : mesh.faces) {
      if (!schedule.starts_step(f.level, k)) continue;
      ledger_.deposit(f, face_flux(mesh, f, f.t_e, state.ue), schedule.dt(f.level));
    }

    bool finite = true;
    int bad_level = schedule.finest_level;
    for (std::size_t c = 0; c < n; ++c) {
      const int l = mesh.cells[c].level;
      if (!schedule.ends_step(l, k)) continue;
      const double dt = schedule.dt(l);
      const double ion = p.reaction ? i_ion(state.v[c], state.w[c], p) : 0.0;
      const double gate = p.reaction ? h_gate(state.v[c], state.w[c], p) : 0.0;
      const double v_new = state.v[c] + (dt / p.c_m) * (iapp_start_[c] / p.beta - ion) +
                           ledger_.take(c) / (p.beta * p.c_m * mesh.area[c]);
      state.w[c] += dt * gate;
      state.v[c] = v_new;
      if (!std::isfinite(v_new)) {
        finite = false;
        bad_level = l;
      }
    }
    if (!finite) {
      throw InstabilityError(
          fmt::format("non-finite transmembrane potential on level {} during local time stepping",
                      bad_level),
          bad_level, t);
    }
    if (cadence_ == EllipticCadence::EveryFineStep || k + 1 == cycle) {
      stepper_.solve_ue(mesh, state, iapp);
    }
    stepper_.record_v(state.v);
  }
}

}  // namespace bidomain
