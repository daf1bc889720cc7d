#pragma once

// Cell-average multiresolution on dyadic grids: projection, the s = 2
// polynomial prediction, detail coefficients and level-dependent thresholds.

#include <array>
#include <span>
#include <vector>

#include "bidomain/grid.hpp"

namespace bidomain {

enum class ToleranceMode { Direct, Derived };

struct MRConfig {
  int finest_level = 6;
  int min_level = 2;
  int stencil = 2;
  double gamma1 = -22.0 / 128.0;
  double gamma2 = 3.0 / 128.0;
  double eps_ref = 5.0e-4;
  ToleranceMode tolerance_mode = ToleranceMode::Direct;
  double C = 1.173828125e-4;
  double alpha = 1.0;
  double D = 1.0;

  void validate() const;

  friend bool operator==(const MRConfig&, const MRConfig&) = default;
};

/// 5x5 neighbourhood of a parent cell, s[dy + 2][dx + 2].
using Stencil = std::array<std::array<double, 5>, 5>;

/// Four children in the order e = (0,0), (1,0), (0,1), (1,1).
using Quad = std::array<double, 4>;

inline constexpr int kComponents = 3;  // v, u_e, w

/// Details d_{e} for e in E* = {(1,0), (0,1), (1,1)}, per state component.
struct DetailSet {
  std::array<std::array<double, 3>, kComponents> d{};

  double max_abs(int component) const;
};

double project(const Quad& children);

/// Predicted averages of the four children:
/// u + (-1)^e1 Qx + (-1)^e2 Qy + (-1)^(e1+e2) Qxy.
Quad predict_children(const Stencil& s, const MRConfig& cfg);
double predict(const Stencil& s, int e1, int e2, const MRConfig& cfg);

/// Weight of stencil cell (dx, dy) in the prediction of child (e1, e2).
double prediction_weight(int dx, int dy, int e1, int e2, const MRConfig& cfg);

/// r_e = true child - predicted child. Sums to zero when the children project to s[2][2].
Quad residuals(const Stencil& s, const Quad& children, const MRConfig& cfg);

/// Details from residuals: the three children with e != (0,0).
std::array<double, 3> details_from_residuals(const Quad& r);

/// Recover all four residuals from the three details.
Quad residuals_from_details(const std::array<double, 3>& d);

/// eps_l = 2^{2(l - L)} eps_R.
double threshold_for_level(int level, double eps_ref, int finest_level);
double threshold_for_level(int level, const MRConfig& cfg);

/// eps_R = C 2^{(2 - alpha) L - 2} / (reaction + D tensor_norm).
double reference_tolerance(double C, double alpha, double D, int finest_level,
                           double reaction_max, double tensor_norm_max);

/// eps_R in effect: the configured value or the derived one.
double effective_eps_ref(const MRConfig& cfg, double reaction_max, double tensor_norm_max);

/// Dense row-major field on one level.
struct LevelField {
  int level = 0;
  std::vector<double> values;

  LevelField() = default;
  explicit LevelField(int lvl, double fill = 0.0)
      : level(lvl), values(std::size_t(cells_per_side(lvl)) * std::size_t(cells_per_side(lvl)), fill) {}

  std::int32_t side() const { return cells_per_side(level); }
  double& at(std::int32_t i, std::int32_t j) { return values[std::size_t(j) * std::size_t(side()) + std::size_t(i)]; }
  double at(std::int32_t i, std::int32_t j) const {
    return values[std::size_t(j) * std::size_t(side()) + std::size_t(i)];
  }
  /// Value with mirror reflection outside the domain.
  double mirrored_at(std::int32_t i, std::int32_t j) const {
    return at(mirror_index(i, side()), mirror_index(j, side()));
  }
};

Stencil gather_stencil(const LevelField& f, std::int32_t i, std::int32_t j);

LevelField project_level(const LevelField& fine);
/// Prediction of the next finer level with all details zero.
LevelField predict_level(const LevelField& coarse, const MRConfig& cfg);

/// Coarsest average plus details of every parent on levels 0..L-1.
struct Multiscale {
  int finest_level = 0;
  double root = 0.0;
  // details[l][row_major(parent)] for parents on level l.
  std::vector<std::vector<std::array<double, 3>>> details;
};

Multiscale encode(const LevelField& fine, const MRConfig& cfg);
LevelField decode(const Multiscale& ms, const MRConfig& cfg);

/// Zero every detail with |d| < scale * eps_l. Returns the number of parents kept.
std::size_t threshold_details(Multiscale& ms, double scale, double eps_ref);

}  // namespace bidomain
