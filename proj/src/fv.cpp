#include "bidomain/fv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

Tensor2 cell_tensor(const CellIndex& cell, Medium medium, const ModelParams& p) {
  // Uniform fibre field: the cell average is the pointwise tensor.
  return conductivity_tensor(geometry(cell).center, medium, p);
}

double harmonic_d_star(double m_kl, double m_lk, double d_k_sigma, double d_l_sigma) {
  return m_kl * m_lk * (d_k_sigma + d_l_sigma) / (d_k_sigma * m_kl + d_l_sigma * m_lk);
}

FaceCoefficient face_coefficient(const CellIndex& k, const CellIndex& l, Medium medium,
                                 const ModelParams& p) {
  const CellGeometry gk = geometry(k);
  const CellGeometry gl = geometry(l);
  const double hk = 0.5 * gk.side;
  const double hl = 0.5 * gl.side;
  const double kx0 = gk.center.x - hk, kx1 = gk.center.x + hk;
  const double ky0 = gk.center.y - hk, ky1 = gk.center.y + hk;
  const double lx0 = gl.center.x - hl, lx1 = gl.center.x + hl;
  const double ly0 = gl.center.y - hl, ly1 = gl.center.y + hl;
  const double overlap_x = std::min(kx1, lx1) - std::max(kx0, lx0);
  const double overlap_y = std::min(ky1, ly1) - std::max(ky0, ly0);

  Point n{};
  double length = 0.0;
  if ((kx1 == lx0 || kx0 == lx1) && overlap_y > 0.0) {
    n = {kx1 == lx0 ? 1.0 : -1.0, 0.0};
    length = overlap_y;
  } else if ((ky1 == ly0 || ky0 == ly1) && overlap_x > 0.0) {
    n = {0.0, ky1 == ly0 ? 1.0 : -1.0};
    length = overlap_x;
  } else {
    throw AdjacencyError(fmt::format("cells (l={}, i={}, j={}) and (l={}, i={}, j={}) do not "
                                     "share an edge",
                                     k.level, k.i, k.j, l.level, l.i, l.j));
  }

  const Point mk = cell_tensor(k, medium, p).apply(n);
  const Point ml = cell_tensor(l, medium, p).apply({-n.x, -n.y});
  const double m_kl = std::hypot(mk.x, mk.y);
  const double m_lk = std::hypot(ml.x, ml.y);
  FaceCoefficient face;
  face.d_star = harmonic_d_star(m_kl, m_lk, hk, hl);
  face.face_length = length;
  face.distance = hk + hl;
  return face;
}

int FvMesh::coarsest_level() const {
  int level = finest_level;
  for (const auto& c : cells) level = std::min(level, c.level);
  return level;
}

void FvMesh::add_face(std::int32_t a, std::int32_t b, int level, double t_i, double t_e) {
  const auto first = std::int32_t(stencil_index.size());
  stencil_index.push_back(b);
  stencil_weight.push_back(1.0);
  faces.push_back({a, b, level, t_i, t_e, first, first + 1});
}

void FvMesh::finalize() {
  const std::size_t n = cells.size();
  std::vector<CsrMatrix::Triplet> ti, te, tie;
  symmetric = true;
  for (const FvFace& f : faces) {
    const bool plain = f.last - f.first == 1 && stencil_index[std::size_t(f.first)] == f.b &&
                       stencil_weight[std::size_t(f.first)] == 1.0;
    if (!plain) symmetric = false;
    auto add = [&](std::int32_t row, std::int32_t col, double scale) {
      ti.push_back({row, col, scale * f.t_i});
      te.push_back({row, col, scale * f.t_e});
      tie.push_back({row, col, scale * (f.t_i + f.t_e)});
    };
    // Row a: t (u_a - opposite); row b: t (opposite - u_a).
    add(f.a, f.a, 1.0);
    add(f.b, f.a, -1.0);
    for (std::int32_t k = f.first; k < f.last; ++k) {
      const double wgt = stencil_weight[std::size_t(k)];
      const std::int32_t col = stencil_index[std::size_t(k)];
      add(f.a, col, -wgt);
      add(f.b, col, wgt);
    }
  }
  op_i = CsrMatrix(n, std::move(ti));
  op_e = CsrMatrix(n, std::move(te));
  op_ie = CsrMatrix(n, std::move(tie));
}

FvMesh make_uniform_mesh(int level, const ModelParams& p) {
  FvMesh mesh;
  mesh.finest_level = level;
  mesh.cells = z_order_cells(level);
  const std::size_t n = mesh.cells.size();
  std::vector<std::int32_t> position(n);
  mesh.geometry.reserve(n);
  mesh.area.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    position[row_major(mesh.cells[k])] = std::int32_t(k);
    mesh.geometry.push_back(geometry(mesh.cells[k]));
    mesh.area.push_back(mesh.geometry.back().area);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const CellIndex& c = mesh.cells[k];
    for (Direction dir : {Direction::PlusX, Direction::PlusY}) {
      const auto nb = neighbor(c, dir);
      if (!nb) continue;
      const double t_i = face_coefficient(c, *nb, Medium::Intra, p).transmissibility();
      const double t_e = face_coefficient(c, *nb, Medium::Extra, p).transmissibility();
      mesh.add_face(std::int32_t(k), position[row_major(*nb)], level, t_i, t_e);
    }
  }
  mesh.finalize();
  return mesh;
}

double reaction_max(const FieldState& state, std::span<const double> iapp, const ModelParams& p) {
  double best = 0.0;
  for (std::size_t k = 0; k < state.size(); ++k) {
    const double ion = p.reaction ? std::abs(i_ion(state.v[k], state.w[k], p)) : 0.0;
    const double app = iapp.empty() ? 0.0 : 2.0 * std::abs(iapp[k]);
    best = std::max(best, ion + app);
  }
  return best;
}

double tensor_norm_max(const ModelParams& p) {
  return conductivity_tensor({}, Medium::Intra, p).spectral_norm() +
         conductivity_tensor({}, Medium::Extra, p).spectral_norm();
}

double cfl_bound(double reaction, double tensor_norm, double h) {
  return h / (2.0 * reaction + 4.0 * tensor_norm / h);
}

double cfl_max_dt(const FieldState& state, std::span<const double> iapp, const ModelParams& p,
                  double h) {
  return cfl_bound(reaction_max(state, iapp, p), tensor_norm_max(p), h);
}

std::vector<double> explicit_v_step(const FvMesh& mesh, const FieldState& state,
                                    std::span<const double> iapp, double dt,
                                    const ModelParams& p) {
  const std::size_t n = mesh.size();
  std::vector<double> v_new(n);
  mesh.op_e.apply(state.ue, v_new);  // -sum_L F_e
  const double scale = dt / (p.beta * p.c_m);
  bool finite = true;
  for (std::size_t k = 0; k < n; ++k) {
    const double ion = p.reaction ? i_ion(state.v[k], state.w[k], p) : 0.0;
    const double app = iapp.empty() ? 0.0 : iapp[k];
    v_new[k] = state.v[k] + (dt / p.c_m) * (app / p.beta - ion) + scale * v_new[k] / mesh.area[k];
    finite = finite && std::isfinite(v_new[k]);
  }
  if (!finite) {
    throw InstabilityError("non-finite transmembrane potential after explicit update "
                           "(time step above the stability limit?)",
                           mesh.finest_level, 0.0);
  }
  return v_new;
}

std::vector<double> w_step(const FieldState& state, double dt, const ModelParams& p) {
  std::vector<double> w_new(state.w);
  if (!p.reaction) return w_new;
  for (std::size_t k = 0; k < w_new.size(); ++k) w_new[k] += dt * h_gate(state.v[k], state.w[k], p);
  return w_new;
}

EllipticSystem assemble_elliptic(const FvMesh& mesh, std::span<const double> v_new,
                                 std::span<const double> iapp) {
  std::vector<double> rhs(mesh.size());
  mesh.op_i.apply(v_new, rhs);
  for (std::size_t k = 0; k < rhs.size(); ++k) {
    rhs[k] = -rhs[k] - (iapp.empty() ? 0.0 : mesh.area[k] * iapp[k]);
  }
  return {mesh.op_ie, std::move(rhs)};
}

FvStepper::FvStepper(const ModelParams& params, const StimulusProtocol& stimulus,
                     const SolverOptions& solver)
    : params_(params), stimulus_(stimulus), solver_(solver), tensor_norm_(tensor_norm_max(params)) {
  params_.validate();
}

std::span<const double> FvStepper::applied_current(const FvMesh& mesh, double t) {
  if (!stimulus_.current_active(t)) {
    if (!iapp_zero_ || iapp_.size() != mesh.size()) iapp_.assign(mesh.size(), 0.0);
    iapp_zero_ = true;
  } else {
    iapp_ = applied_current_cells(t, mesh.geometry, stimulus_);
    iapp_zero_ = false;
  }
  return iapp_;
}

SolveReport FvStepper::solve_ue(const FvMesh& mesh, FieldState& state,
                                std::span<const double> iapp) {
  const std::size_t n = mesh.size();
  rhs_.resize(n);
  mesh.op_i.apply(state.v, rhs_);
  for (std::size_t k = 0; k < n; ++k) {
    rhs_[k] = -rhs_[k] - (iapp.empty() ? 0.0 : mesh.area[k] * iapp[k]);
  }
  guess_.assign(state.ue.begin(), state.ue.end());
  if (history_valid_ && ue_prev_.size() == n) {
    for (std::size_t k = 0; k < n; ++k) guess_[k] = 2.0 * state.ue[k] - ue_prev_[k];
  }
  const SolveReport report =
      solve_zero_mean({mesh.op_ie, rhs_, mesh.area, mesh.symmetric}, guess_, solver_);
  std::swap(ue_prev_, state.ue);
  std::swap(state.ue, guess_);
  history_valid_ = ue_prev_.size() == state.ue.size();

  double total = 0.0, mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    total += mesh.area[k];
    mean += mesh.area[k] * state.ue[k];
  }
  stats_.max_compatibility = std::max(stats_.max_compatibility, std::abs(mean) / total);
  ++stats_.solves;
  stats_.iterations += report.iterations;
  return report;
}

void FvStepper::record_v(std::span<const double> v) {
  for (double value : v) stats_.max_abs_v = std::max(stats_.max_abs_v, std::abs(value));
}

void FvStepper::step(const FvMesh& mesh, FieldState& state, double t, double dt) {
  const auto iapp = applied_current(mesh, t);
  const std::size_t n = mesh.size();
  const ModelParams& p = params_;

  flux_.resize(n);
  v_next_.resize(n);
  w_next_.resize(n);
  mesh.op_e.apply(state.ue, flux_);
  const double scale = dt / (p.beta * p.c_m);
  double reaction = 0.0;
  double vmax = stats_.max_abs_v;
  bool finite = true;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = state.v[k];
    const double w = state.w[k];
    const double ion = p.reaction ? i_ion(v, w, p) : 0.0;
    reaction = std::max(reaction, std::abs(ion) + 2.0 * std::abs(iapp[k]));
    w_next_[k] = p.reaction ? w + dt * h_gate(v, w, p) : w;
    const double v_new = v + (dt / p.c_m) * (iapp[k] / p.beta - ion) + scale * flux_[k] / mesh.area[k];
    finite = finite && std::isfinite(v_new);
    vmax = std::max(vmax, std::abs(v_new));
    v_next_[k] = v_new;
  }
  const double h = 1.0 / double(cells_per_side(mesh.finest_level));
  const double bound = cfl_bound(reaction, tensor_norm_, h);
  if (dt > bound * (1.0 + 1e-12)) {
    throw InstabilityError(fmt::format("CFL violation on level {}: dt = {:.6e} exceeds the "
                                       "stability bound {:.6e}",
                                       mesh.finest_level, dt, bound),
                           mesh.finest_level, t);
  }
  if (!finite) {
    throw InstabilityError("non-finite transmembrane potential after explicit update "
                           "(time step above the stability limit?)",
                           mesh.finest_level, t);
  }
  std::swap(state.v, v_next_);
  std::swap(state.w, w_next_);
  solve_ue(mesh, state, iapp);
  stats_.max_abs_v = vmax;
}

}  // namespace bidomain
