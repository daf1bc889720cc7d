#pragma once

// Anisotropic bidomain tissue with Mitchell-Schaeffer membrane kinetics.
// Units follow the parameter block used for the reference experiment
// (mV, ms, cm, Ohm^-1 cm^-1); nothing is rescaled internally.

#include <numbers>
#include <span>
#include <vector>

#include "bidomain/grid.hpp"

namespace bidomain {

enum class Medium { Intra, Extra };

/// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct Tensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Point apply(Point n) const { return {xx * n.x + xy * n.y, xy * n.x + yy * n.y}; }
  /// Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const;
  double spectral_norm() const;
};

struct ModelParams {
  double beta = 4036.5;   // surface-to-volume ratio [cm^-1]
  double c_m = 1.0;       // membrane capacitance
  double R_m = 2.0e4;     // surface resistivity [Ohm cm^2]
  double v_p = 100.0;     // potential scale [mV]
  double eta1 = 0.005;
  double eta2 = 0.1;
  double eta3 = 1.5;
  double eta4 = 7.5;
  double eta5 = 0.1;
  double sigma_il = 6.0;
  double sigma_it = 0.6;
  double sigma_el = 24.0;
  double sigma_et = 12.0;
  double fiber_angle = -std::numbers::pi / 4.0;  // radians, w.r.t. the x axis
  bool reaction = true;  // false switches I_ion and H off (pure diffusion tests)

  /// Throws ParameterError naming the first offending field.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// M_j = sigma_t I + (sigma_l - sigma_t) a a^T with a = (cos theta, sin theta).
/// The fibre field is uniform, so the position only documents the call site.
Tensor2 conductivity_tensor(Point x, Medium medium, const ModelParams& p);

double w_inf(double s, const ModelParams& p);
double eta_inf(double s, const ModelParams& p);

/// I_ion(v, w) = (v_p/R_m) (v/(v_p eta2) - v^2 (1 - v/v_p) w / (v_p^2 eta1)).
double i_ion(double v, double w, const ModelParams& p);

/// H(v, w) = (w_inf(v/v_p) - w) / (R_m c_m eta_inf(v/v_p)).
double h_gate(double v, double w, const ModelParams& p);

/// Stimulus and initial data. The default excites a centred disc through v0
/// and leaves I_app switched off.
struct StimulusProtocol {
  enum class Shape { Disc, Rectangle };

  Shape shape = Shape::Disc;
  double center_x = 0.5;
  double center_y = 0.5;
  double radius = 0.05;
  double half_width = 0.05;
  double half_height = 0.05;
  double initial_v = 100.0;  // value of v0 inside the shape (v_p by default)
  double initial_w = 1.0;
  double current_amplitude = 0.0;
  double current_t_on = 0.0;
  double current_t_off = 0.0;

  bool inside(Point x) const;
  /// Exact area of the shape clipped to the unit square (rectangle) or of the disc
  /// assuming it lies inside the domain.
  double shape_area() const;
  bool current_active(double t) const;
  void validate() const;

  friend bool operator==(const StimulusProtocol&, const StimulusProtocol&) = default;
};

/// Pointwise I_app(t, x): the indicator of the shape times the amplitude, minus
/// its spatial mean over the unit square.
double applied_current(double t, Point x, const StimulusProtocol& proto);

struct InitialValues {
  double v = 0.0;
  double w = 1.0;
};

InitialValues initial_state(Point x, const StimulusProtocol& proto);

/// Fraction of a cell covered by the stimulus shape (sub-cell midpoint sampling).
double shape_fraction(const CellGeometry& cell, const StimulusProtocol& proto);

/// Cell averages of v0 and w0.
InitialValues initial_cell_average(const CellGeometry& cell, const StimulusProtocol& proto);

/// Cell averages of I_app on an arbitrary partition, with the discrete
/// area-weighted mean removed so that sum |K| I_app,K = 0 on this mesh.
std::vector<double> applied_current_cells(double t, std::span<const CellGeometry> cells,
                                          const StimulusProtocol& proto);

}  // namespace bidomain
