#pragma once

// Cell-centred two-point finite volumes for the bidomain system on a
// partition of the unit square into dyadic squares, with the explicit /
// implicit / explicit splitting of v, u_e and w.

#include <cstdint>
#include <span>
#include <vector>

#include "bidomain/elliptic.hpp"
#include "bidomain/grid.hpp"
#include "bidomain/model.hpp"

namespace bidomain {

struct FaceCoefficient {
  double d_star = 0.0;       // harmonic transmissibility d*_{j,K,L}
  double face_length = 0.0;  // |sigma_{K,L}|
  double distance = 0.0;     // d(K, L)

  double transmissibility() const { return d_star * face_length / distance; }
};

/// Cell-averaged conductivity tensor M_{j,K}.
Tensor2 cell_tensor(const CellIndex& cell, Medium medium, const ModelParams& p);

/// d* = M_KL M_LK d(K,L) / (d(K,sigma) M_KL + d(L,sigma) M_LK).
double harmonic_d_star(double m_kl, double m_lk, double d_k_sigma, double d_l_sigma);

/// Face coefficient for two edge-adjacent cells (same level or one level apart).
/// Throws AdjacencyError when K and L do not share an edge segment.
FaceCoefficient face_coefficient(const CellIndex& k, const CellIndex& l, Medium medium,
                                 const ModelParams& p);

/// F_{K,L} = d* |sigma| / d(K,L) (u_L - u_K).
inline double numerical_flux(const FaceCoefficient& face, double u_k, double u_l) {
  return face.transmissibility() * (u_l - u_k);
}

/// A face of the flux network. The value on the opposite side is the linear
/// combination sum_k weight_k u[index_k] (a single cell for ordinary faces, a
/// predicted virtual cell for adaptive interfaces). The flux is evaluated on
/// the side of `a`; `b` owns the opposite side and receives minus that flux.
struct FvFace {
  std::int32_t a = 0;
  std::int32_t b = 0;
  int level = 0;       // level at which the flux is evaluated
  double t_i = 0.0;    // transmissibility, intracellular
  double t_e = 0.0;    // transmissibility, extracellular
  std::int32_t first = 0;
  std::int32_t last = 0;
};

struct FvMesh {
  int finest_level = 0;
  std::vector<CellIndex> cells;
  std::vector<CellGeometry> geometry;
  std::vector<double> area;
  std::vector<FvFace> faces;
  std::vector<std::int32_t> stencil_index;
  std::vector<double> stencil_weight;
  // (op u)_K = sum_L t_KL (u_K - u_L): the negative of the flux balance.
  CsrMatrix op_i;
  CsrMatrix op_e;
  CsrMatrix op_ie;
  bool symmetric = true;

  std::size_t size() const { return cells.size(); }
  double opposite_value(const FvFace& face, std::span<const double> u) const {
    double sum = 0.0;
    for (std::int32_t k = face.first; k < face.last; ++k) {
      sum += stencil_weight[std::size_t(k)] * u[std::size_t(stencil_index[std::size_t(k)])];
    }
    return sum;
  }
  int coarsest_level() const;

  /// Append a face whose opposite side is a single cell.
  void add_face(std::int32_t a, std::int32_t b, int level, double t_i, double t_e);
  /// Build op_i, op_e, op_ie and the symmetry flag from the face list.
  void finalize();
};

/// Uniform level-L mesh in Z order with same-level faces only.
FvMesh make_uniform_mesh(int level, const ModelParams& p);

struct FieldState {
  std::vector<double> v;
  std::vector<double> ue;
  std::vector<double> w;

  std::size_t size() const { return v.size(); }
};

/// max_K (|I_ion,K| + 2 |I_app,K|).
double reaction_max(const FieldState& state, std::span<const double> iapp, const ModelParams& p);

/// max_K (|M_i,K| + |M_e,K|) with spectral norms.
double tensor_norm_max(const ModelParams& p);

/// dt <= h / (2 R + 4 h^-1 S).
double cfl_bound(double reaction, double tensor_norm, double h);

double cfl_max_dt(const FieldState& state, std::span<const double> iapp, const ModelParams& p,
                  double h);

/// beta c_m |K| (v^{n+1} - v^n)/dt + sum_L F_e(u_e^n) + beta |K| I_ion^n = |K| I_app^n.
/// Throws InstabilityError (level = finest level) if the result is not finite.
std::vector<double> explicit_v_step(const FvMesh& mesh, const FieldState& state,
                                    std::span<const double> iapp, double dt,
                                    const ModelParams& p);

/// w^{n+1} = w^n + dt H(v^n, w^n).
std::vector<double> w_step(const FieldState& state, double dt, const ModelParams& p);

struct EllipticSystem {
  const CsrMatrix& matrix;
  std::vector<double> rhs;
};

/// op_ie u_e = -op_i v - |K| I_app: the u_e equation with the v fluxes on the right.
EllipticSystem assemble_elliptic(const FvMesh& mesh, std::span<const double> v_new,
                                 std::span<const double> iapp);

struct StepStats {
  std::int64_t solves = 0;
  std::int64_t iterations = 0;
  double max_compatibility = 0.0;  // max |sum |K| u_e| / sum |K| over all solves
  double max_abs_v = 0.0;
};

/// Drives the three updates of one time step on any FvMesh with a global dt.
/// Keeps the previous u_e to extrapolate the Krylov initial guess.
class FvStepper {
 public:
  FvStepper(const ModelParams& params, const StimulusProtocol& stimulus,
            const SolverOptions& solver);

  const ModelParams& params() const { return params_; }
  const StimulusProtocol& stimulus() const { return stimulus_; }
  const SolverOptions& solver_options() const { return solver_; }

  /// I_app cell averages at time t (zero-mean on this mesh).
  std::span<const double> applied_current(const FvMesh& mesh, double t);

  /// Solve the u_e equation for the current v. Used for u_e^0 and by the
  /// local time stepping driver.
  SolveReport solve_ue(const FvMesh& mesh, FieldState& state, std::span<const double> iapp);

  /// One step from t to t + dt. Throws InstabilityError if dt exceeds the CFL bound.
  void step(const FvMesh& mesh, FieldState& state, double t, double dt);

  /// The stored u_e history no longer matches the mesh (after remeshing).
  void invalidate_history() { history_valid_ = false; }

  const StepStats& stats() const { return stats_; }
  void record_v(std::span<const double> v);

 private:
  ModelParams params_;
  StimulusProtocol stimulus_;
  SolverOptions solver_;
  double tensor_norm_;
  std::vector<double> iapp_;
  bool iapp_zero_ = false;
  std::vector<double> ue_prev_;
  std::vector<double> flux_, v_next_, w_next_, rhs_, guess_;
  bool history_valid_ = false;
  StepStats stats_;
};

}  // namespace bidomain
