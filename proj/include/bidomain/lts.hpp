#pragma once

// Local time stepping on a leaf mesh: a leaf of level l advances with
// dt_l = 2^{L-l} dt. Fluxes are accumulated per cell over each step
// window; a coarse leaf receives minus the sum of the fine fluxes across its
// interface edges.

#include <cstdint>
#include <span>
#include <vector>

#include "bidomain/fv.hpp"

namespace bidomain {

enum class EllipticCadence { EveryFineStep, SyncOnly };

double dt_for_level(int level, int finest_level, double dt_finest);

struct LtsSchedule {
  int finest_level = 0;
  int coarsest_level = 0;  // level whose single step spans one cycle
  double dt_finest = 0.0;
  int remesh_interval = 2;

  double dt(int level) const { return dt_for_level(level, finest_level, dt_finest); }
  /// Fine steps per level step, 2^{L-l}.
  std::int64_t stride(int level) const { return std::int64_t{1} << (finest_level - level); }
  /// Fine substeps per synchronisation cycle.
  std::int64_t cycle_steps() const { return stride(coarsest_level); }
  bool starts_step(int level, std::int64_t substep) const { return substep % stride(level) == 0; }
  bool ends_step(int level, std::int64_t substep) const {
    return (substep + 1) % stride(level) == 0;
  }
};

/// Flux into `a` through `face`: t (u_opposite - u_a).
double face_flux(const FvMesh& mesh, const FvFace& face, double transmissibility,
                 std::span<const double> u);

/// Interface flux for the coarse side: minus the sum of the fine fluxes.
double interface_flux(std::span<const double> fine_fluxes);

/// Per-cell sum of dt_f * (op u)_K contributions over the current step window.
class InterfaceFluxLedger {
 public:
  void reset(std::size_t n) { acc_.assign(n, 0.0); }
  /// Record the flux into `a` (and its negative for the owner of the opposite side).
  void deposit(const FvFace& face, double flux_into_a, double dt) {
    acc_[std::size_t(face.a)] -= dt * flux_into_a;
    acc_[std::size_t(face.b)] += dt * flux_into_a;
  }
  double take(std::size_t k) {
    const double value = acc_[k];
    acc_[k] = 0.0;
    return value;
  }
  double sum() const;
  std::span<const double> values() const { return acc_; }

 private:
  std::vector<double> acc_;
};

/// Advance every leaf of `mesh` through one synchronisation cycle starting at
/// fine step `step0`. The elliptic solve follows `cadence`. Throws
/// InstabilityError naming the offending level when dt_l exceeds its CFL bound.
class LtsStepper {
 public:
  LtsStepper(FvStepper& stepper, EllipticCadence cadence) : stepper_(stepper), cadence_(cadence) {}

  void advance_cycle(const FvMesh& mesh, FieldState& state, const LtsSchedule& schedule,
                     std::int64_t step0);

  const InterfaceFluxLedger& ledger() const { return ledger_; }

 private:
  FvStepper& stepper_;
  EllipticCadence cadence_;
  InterfaceFluxLedger ledger_;
  std::vector<double> iapp_start_;
};

}  // namespace bidomain
