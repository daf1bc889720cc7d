#include "bidomain/multires.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

void MRConfig::validate() const {
  if (finest_level < 1 || finest_level > 14) {
    throw ParameterError(fmt::format("finest_level must lie in [1, 14] (got {})", finest_level));
  }
  if (min_level < 0 || min_level > finest_level) {
    throw ParameterError(
        fmt::format("min_level must lie in [0, finest_level] (got {})", min_level));
  }
  if (stencil != 2) throw ParameterError("only the stencil half-width s = 2 is supported");
  if (!std::isfinite(gamma1) || !std::isfinite(gamma2)) {
    throw ParameterError("prediction coefficients must be finite");
  }
  if (!(eps_ref > 0.0) && tolerance_mode == ToleranceMode::Direct) {
    throw ParameterError(fmt::format("eps_ref must be positive (got {})", eps_ref));
  }
  if (tolerance_mode == ToleranceMode::Derived && !(C > 0.0)) {
    throw ParameterError("C must be positive in derived tolerance mode");
  }
}

double DetailSet::max_abs(int component) const {
  const auto& c = d[std::size_t(component)];
  return std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
}

double project(const Quad& children) {
  return 0.25 * (children[0] + children[1] + children[2] + children[3]);
}

Quad predict_children(const Stencil& s, const MRConfig& cfg) {
  const double g[3] = {0.0, cfg.gamma1, cfg.gamma2};
  double qx = 0.0, qy = 0.0, qxy = 0.0;
  for (int a = 1; a <= 2; ++a) {
    qx += g[a] * (s[2][2 + a] - s[2][2 - a]);
    qy += g[a] * (s[2 + a][2] - s[2 - a][2]);
    for (int b = 1; b <= 2; ++b) {
      qxy += g[a] * g[b] *
             (s[2 + b][2 + a] - s[2 - b][2 + a] - s[2 + b][2 - a] + s[2 - b][2 - a]);
    }
  }
  const double u = s[2][2];
  return {u + qx + qy + qxy, u - qx + qy - qxy, u + qx - qy - qxy, u - qx - qy + qxy};
}

double predict(const Stencil& s, int e1, int e2, const MRConfig& cfg) {
  return predict_children(s, cfg)[std::size_t(e1 + 2 * e2)];
}

double prediction_weight(int dx, int dy, int e1, int e2, const MRConfig& cfg) {
  auto one_d = [&](int d, int e) {
    if (d == 0) return 1.0;
    const double g = std::abs(d) == 1 ? cfg.gamma1 : std::abs(d) == 2 ? cfg.gamma2 : 0.0;
    return (e == 0 ? 1.0 : -1.0) * (d > 0 ? g : -g);
  };
  return one_d(dx, e1) * one_d(dy, e2);
}

Quad residuals(const Stencil& s, const Quad& children, const MRConfig& cfg) {
  const Quad p = predict_children(s, cfg);
  return {children[0] - p[0], children[1] - p[1], children[2] - p[2], children[3] - p[3]};
}

std::array<double, 3> details_from_residuals(const Quad& r) { return {r[1], r[2], r[3]}; }

Quad residuals_from_details(const std::array<double, 3>& d) {
  return {-(d[0] + d[1] + d[2]), d[0], d[1], d[2]};
}

double threshold_for_level(int level, double eps_ref, int finest_level) {
  return std::ldexp(eps_ref, 2 * (level - finest_level));
}

double threshold_for_level(int level, const MRConfig& cfg) {
  if (level < 0 || level > cfg.finest_level) {
    throw IndexError(fmt::format("level {} outside [0, {}]", level, cfg.finest_level));
  }
  return threshold_for_level(level, cfg.eps_ref, cfg.finest_level);
}

double reference_tolerance(double C, double alpha, double D, int finest_level,
                           double reaction_max, double tensor_norm_max) {
  const double denominator = reaction_max + D * tensor_norm_max;
  if (!(denominator > 0.0)) {
    throw ParameterError("reference tolerance denominator must be positive");
  }
  return C * std::exp2((2.0 - alpha) * finest_level - 2.0) / denominator;
}

double effective_eps_ref(const MRConfig& cfg, double reaction_max, double tensor_norm_max) {
  if (cfg.tolerance_mode == ToleranceMode::Direct) return cfg.eps_ref;
  return reference_tolerance(cfg.C, cfg.alpha, cfg.D, cfg.finest_level, reaction_max,
                             tensor_norm_max);
}

Stencil gather_stencil(const LevelField& f, std::int32_t i, std::int32_t j) {
  Stencil s{};
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) s[dy + 2][dx + 2] = f.mirrored_at(i + dx, j + dy);
  }
  return s;
}

LevelField project_level(const LevelField& fine) {
  if (fine.level == 0) throw IndexError("cannot project the root level");
  LevelField coarse(fine.level - 1);
  for (std::int32_t j = 0; j < coarse.side(); ++j) {
    for (std::int32_t i = 0; i < coarse.side(); ++i) {
      coarse.at(i, j) = project({fine.at(2 * i, 2 * j), fine.at(2 * i + 1, 2 * j),
                                 fine.at(2 * i, 2 * j + 1), fine.at(2 * i + 1, 2 * j + 1)});
    }
  }
  return coarse;
}

LevelField predict_level(const LevelField& coarse, const MRConfig& cfg) {
  LevelField fine(coarse.level + 1);
  for (std::int32_t j = 0; j < coarse.side(); ++j) {
    for (std::int32_t i = 0; i < coarse.side(); ++i) {
      const Quad p = predict_children(gather_stencil(coarse, i, j), cfg);
      fine.at(2 * i, 2 * j) = p[0];
      fine.at(2 * i + 1, 2 * j) = p[1];
      fine.at(2 * i, 2 * j + 1) = p[2];
      fine.at(2 * i + 1, 2 * j + 1) = p[3];
    }
  }
  return fine;
}

Multiscale encode(const LevelField& fine, const MRConfig& cfg) {
  Multiscale ms;
  ms.finest_level = fine.level;
  ms.details.resize(std::size_t(fine.level));
  LevelField current = fine;
  for (int l = fine.level - 1; l >= 0; --l) {
    LevelField coarse = project_level(current);
    auto& level_details = ms.details[std::size_t(l)];
    level_details.resize(coarse.values.size());
    for (std::int32_t j = 0; j < coarse.side(); ++j) {
      for (std::int32_t i = 0; i < coarse.side(); ++i) {
        const Quad children = {current.at(2 * i, 2 * j), current.at(2 * i + 1, 2 * j),
                               current.at(2 * i, 2 * j + 1), current.at(2 * i + 1, 2 * j + 1)};
        level_details[std::size_t(j) * std::size_t(coarse.side()) + std::size_t(i)] =
            details_from_residuals(residuals(gather_stencil(coarse, i, j), children, cfg));
      }
    }
    current = std::move(coarse);
  }
  ms.root = current.values[0];
  return ms;
}

LevelField decode(const Multiscale& ms, const MRConfig& cfg) {
  LevelField current(0, ms.root);
  for (int l = 0; l < ms.finest_level; ++l) {
    LevelField fine = predict_level(current, cfg);
    const auto& level_details = ms.details[std::size_t(l)];
    for (std::int32_t j = 0; j < current.side(); ++j) {
      for (std::int32_t i = 0; i < current.side(); ++i) {
        const Quad r = residuals_from_details(
            level_details[std::size_t(j) * std::size_t(current.side()) + std::size_t(i)]);
        fine.at(2 * i, 2 * j) += r[0];
        fine.at(2 * i + 1, 2 * j) += r[1];
        fine.at(2 * i, 2 * j + 1) += r[2];
        fine.at(2 * i + 1, 2 * j + 1) += r[3];
      }
    }
    current = std::move(fine);
  }
  return current;
}

std::size_t threshold_details(Multiscale& ms, double scale, double eps_ref) {
  std::size_t kept = 0;
  for (int l = 0; l < ms.finest_level; ++l) {
    const double eps = scale * threshold_for_level(l, eps_ref, ms.finest_level);
    for (auto& d : ms.details[std::size_t(l)]) {
      const double m = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
      if (m < eps) {
        d = {0.0, 0.0, 0.0};
      } else {
        ++kept;
      }
    }
  }
  return kept;
}

}  // namespace bidomain
