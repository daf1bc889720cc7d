#include "bidomain/model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

std::array<double, 2> Tensor2::eigenvalues() const {
  const double mean = 0.5 * (xx + yy);
  const double radius = std::hypot(0.5 * (xx - yy), xy);
  return {mean - radius, mean + radius};
}

double Tensor2::spectral_norm() const {
  const auto ev = eigenvalues();
  return std::max(std::abs(ev[0]), std::abs(ev[1]));
}

void ModelParams::validate() const {
  auto positive = [](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw ParameterError(fmt::format("model parameter {} must be positive (got {})", name, value));
    }
  };
  positive(beta, "beta");
  positive(c_m, "c_m");
  positive(R_m, "R_m");
  positive(v_p, "v_p");
  positive(eta1, "eta1");
  positive(eta2, "eta2");
  positive(eta3, "eta3");
  positive(eta4, "eta4");
  positive(sigma_il, "sigma_il");
  positive(sigma_it, "sigma_it");
  positive(sigma_el, "sigma_el");
  positive(sigma_et, "sigma_et");
  if (!std::isfinite(eta5)) throw ParameterError("model parameter eta5 must be finite");
  if (!std::isfinite(fiber_angle)) throw ParameterError("model parameter fiber_angle must be finite");
}

Tensor2 conductivity_tensor(Point /*x*/, Medium medium, const ModelParams& p) {
  const double sl = medium == Medium::Intra ? p.sigma_il : p.sigma_el;
  const double st = medium == Medium::Intra ? p.sigma_it : p.sigma_et;
  if (!(sl > 0.0) || !(st > 0.0)) {
    throw ParameterError("conductivities must be positive");
  }
  const double c = std::cos(p.fiber_angle);
  const double s = std::sin(p.fiber_angle);
  const double d = sl - st;
  return {st + d * c * c, d * c * s, st + d * s * s};
}

double w_inf(double s, const ModelParams& p) { return s < p.eta5 ? 1.0 : 0.0; }

double eta_inf(double s, const ModelParams& p) { return s < p.eta5 ? p.eta3 : p.eta4; }

double i_ion(double v, double w, const ModelParams& p) {
  return (p.v_p / p.R_m) *
         (v / (p.v_p * p.eta2) - v * v * (1.0 - v / p.v_p) * w / (p.v_p * p.v_p * p.eta1));
}

double h_gate(double v, double w, const ModelParams& p) {
  const double s = v / p.v_p;
  return (w_inf(s, p) - w) / (p.R_m * p.c_m * eta_inf(s, p));
}

bool StimulusProtocol::inside(Point x) const {
  const double dx = x.x - center_x;
  const double dy = x.y - center_y;
  if (shape == Shape::Disc) return dx * dx + dy * dy < radius * radius;
  return std::abs(dx) < half_width && std::abs(dy) < half_height;
}

double StimulusProtocol::shape_area() const {
  if (shape == Shape::Disc) return std::numbers::pi * radius * radius;
  const double x0 = std::max(0.0, center_x - half_width);
  const double x1 = std::min(1.0, center_x + half_width);
  const double y0 = std::max(0.0, center_y - half_height);
  const double y1 = std::min(1.0, center_y + half_height);
  return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
}

void StimulusProtocol::validate() const {
  auto finite = [](double value, const char* name) {
    if (!std::isfinite(value)) {
      throw ParameterError(fmt::format("stimulus parameter {} must be finite", name));
    }
  };
  finite(center_x, "center_x");
  finite(center_y, "center_y");
  finite(initial_v, "initial_v");
  finite(initial_w, "initial_w");
  finite(current_amplitude, "current_amplitude");
  finite(current_t_on, "current_t_on");
  finite(current_t_off, "current_t_off");
  if (!(radius > 0.0)) throw ParameterError("stimulus radius must be positive");
  if (!(half_width > 0.0)) throw ParameterError("stimulus half_width must be positive");
  if (!(half_height > 0.0)) throw ParameterError("stimulus half_height must be positive");
  if (current_t_off < current_t_on) {
    throw ParameterError("stimulus current_t_off must not precede current_t_on");
  }
}

bool StimulusProtocol::current_active(double t) const {
  return current_amplitude != 0.0 && t >= current_t_on && t < current_t_off;
}

double applied_current(double t, Point x, const StimulusProtocol& proto) {
  if (!proto.current_active(t)) return 0.0;
  const double indicator = proto.inside(x) ? 1.0 : 0.0;
  return proto.current_amplitude * (indicator - proto.shape_area());
}

InitialValues initial_state(Point x, const StimulusProtocol& proto) {
  return {proto.inside(x) ? proto.initial_v : 0.0, proto.initial_w};
}

double shape_fraction(const CellGeometry& cell, const StimulusProtocol& proto) {
  constexpr int kSamples = 16;
  const double x0 = cell.center.x - 0.5 * cell.side;
  const double y0 = cell.center.y - 0.5 * cell.side;
  const double step = cell.side / kSamples;
  int hits = 0;
  for (int b = 0; b < kSamples; ++b) {
    for (int a = 0; a < kSamples; ++a) {
      if (proto.inside({x0 + (a + 0.5) * step, y0 + (b + 0.5) * step})) ++hits;
    }
  }
  return double(hits) / double(kSamples * kSamples);
}

InitialValues initial_cell_average(const CellGeometry& cell, const StimulusProtocol& proto) {
  return {proto.initial_v * shape_fraction(cell, proto), proto.initial_w};
}

std::vector<double> applied_current_cells(double t, std::span<const CellGeometry> cells,
                                          const StimulusProtocol& proto) {
  std::vector<double> out(cells.size(), 0.0);
  if (!proto.current_active(t)) return out;
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    out[k] = proto.current_amplitude * shape_fraction(cells[k], proto);
    weighted += cells[k].area * out[k];
    total += cells[k].area;
  }
  const double mean = weighted / total;
  for (double& value : out) value -= mean;
  return out;
}

}  // namespace bidomain
