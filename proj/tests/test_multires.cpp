#include <doctest.h>

#include <cmath>
#include <random>

#include "bidomain/errors.hpp"
#include "bidomain/multires.hpp"

using namespace bidomain;
using doctest::Approx;

namespace {

// Exact average of x^a y^b over a dyadic cell.
double monomial_average(int a, int b, const CellIndex& c) {
  const double h = std::ldexp(1.0, -c.level);
  auto avg = [h](int p, std::int32_t k) {
    const double x0 = k * h, x1 = (k + 1) * h;
    return (std::pow(x1, p + 1) - std::pow(x0, p + 1)) / ((p + 1) * h);
  };
  return avg(a, c.i) * avg(b, c.j);
}

Stencil random_stencil(std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Stencil s;
  for (auto& row : s) {
    for (double& v : row) v = dist(rng);
  }
  return s;
}

}  // namespace

TEST_CASE("prediction weights reproduce a frozen stencil") {
  // Values from exact rational evaluation of the prediction operator.
  const MRConfig cfg;
  Stencil s;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      s[dy + 2][dx + 2] = ((dx + 3) * (dx + 3) * (dx + 3) * (dy + 4) + dy * dy) / 10.0;
    }
  }
  s[0][3] = -5.0;  // (dx, dy) = (1, -2)
  const Quad q = predict_children(s, cfg);
  CHECK(q[0] == Approx(308517.0 / 40960.0).epsilon(1e-14));
  CHECK(q[1] == Approx(520923.0 / 40960.0).epsilon(1e-14));
  CHECK(q[2] == Approx(356059.0 / 40960.0).epsilon(1e-14));
  CHECK(q[3] == Approx(583973.0 / 40960.0).epsilon(1e-14));
  CHECK(predict(s, 1, 0, cfg) == q[1]);
  double sum = 0.0;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) sum += prediction_weight(dx, dy, 1, 1, cfg);
  }
  CHECK(sum == Approx(1.0).epsilon(1e-15));
}

TEST_CASE("prediction is consistent with projection") {
  const MRConfig cfg;
  std::mt19937 rng(42);
  double worst = 0.0;
  for (int n = 0; n < 2000; ++n) {
    const Stencil s = random_stencil(rng);
    worst = std::max(worst, std::abs(project(predict_children(s, cfg)) - s[2][2]));
  }
  CHECK(worst <= 1e-14);
}

TEST_CASE("details vanish on polynomials up to degree four") {
  const MRConfig cfg;
  const CellIndex p{4, 7, 9};
  for (int degree = 0; degree <= 4; ++degree) {
    for (int a = 0; a <= degree; ++a) {
      const int b = degree - a;
      Stencil s;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          s[dy + 2][dx + 2] = monomial_average(a, b, {p.level, p.i + dx, p.j + dy});
        }
      }
      Quad truth;
      for (int e = 0; e < 4; ++e) truth[e] = monomial_average(a, b, child(p, e & 1, e >> 1));
      const Quad r = residuals(s, truth, cfg);
      for (double v : r) CHECK(std::abs(v) <= 1e-12 * std::abs(s[2][2]));
    }
  }
  // Degree five is not reproduced.
  Stencil s;
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) s[dy + 2][dx + 2] = monomial_average(5, 0, {p.level, p.i + dx, p.j + dy});
  }
  Quad truth;
  for (int e = 0; e < 4; ++e) truth[e] = monomial_average(5, 0, child(p, e & 1, e >> 1));
  CHECK(std::abs(residuals(s, truth, cfg)[1]) > 1e-10);
}

TEST_CASE("residuals and details") {
  const Quad r{0.5, -0.25, 0.125, -0.375};
  const auto d = details_from_residuals(r);
  CHECK(d[0] == -0.25);
  CHECK(d[1] == 0.125);
  CHECK(d[2] == -0.375);
  const Quad back = residuals_from_details(d);
  for (int e = 0; e < 4; ++e) CHECK(back[e] == Approx(r[e]));
}

TEST_CASE("level thresholds") {
  CHECK(threshold_for_level(6, 5e-4, 6) == 5e-4);
  CHECK(threshold_for_level(5, 5e-4, 6) == Approx(1.25e-4).epsilon(1e-15));
  CHECK(threshold_for_level(4, 5e-4, 6) == Approx(3.125e-5).epsilon(1e-15));
  MRConfig cfg;
  for (int l = 1; l <= cfg.finest_level; ++l) {
    CHECK(threshold_for_level(l, cfg) > threshold_for_level(l - 1, cfg));
  }
  CHECK_THROWS_AS(threshold_for_level(7, cfg), IndexError);
}

TEST_CASE("reference tolerance formula") {
  // The default C returns 5e-4 at L = 9 for the initial data of the reference run.
  const MRConfig cfg;
  CHECK(reference_tolerance(cfg.C, 1.0, 1.0, 9, 0.05, 30.0) == Approx(5e-4).epsilon(1e-14));
  // alpha = 2 removes the dependence on L.
  CHECK(reference_tolerance(1.0, 2.0, 1.0, 5, 1.0, 1.0) == reference_tolerance(1.0, 2.0, 1.0, 9, 1.0, 1.0));
  CHECK_THROWS_AS(reference_tolerance(1.0, 1.0, 1.0, 6, 0.0, 0.0), ParameterError);
  MRConfig derived = cfg;
  derived.tolerance_mode = ToleranceMode::Derived;
  derived.finest_level = 9;
  CHECK(effective_eps_ref(derived, 0.05, 30.0) == Approx(5e-4));
  CHECK(effective_eps_ref(cfg, 123.0, 456.0) == cfg.eps_ref);
}

TEST_CASE("encode and decode are inverse") {
  MRConfig cfg;
  cfg.finest_level = 6;
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  LevelField f(6);
  for (double& v : f.values) v = dist(rng);
  const LevelField back = decode(encode(f, cfg), cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) worst = std::max(worst, std::abs(back.values[k] - f.values[k]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("thresholding keeps details near a discontinuity") {
  MRConfig cfg;
  cfg.finest_level = 6;
  LevelField f(6);
  for (std::int32_t j = 0; j < 64; ++j) {
    for (std::int32_t i = 0; i < 64; ++i) f.at(i, j) = i < 40 ? 1.0 : 0.0;
  }
  Multiscale ms = encode(f, cfg);
  const std::size_t kept = threshold_details(ms, 1.0, 1e-3);
  CHECK(kept > 0);
  CHECK(kept < 400);  // of 1365 parents
  const LevelField back = decode(ms, cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) worst = std::max(worst, std::abs(back.values[k] - f.values[k]));
  CHECK(worst < 1e-2);
}

TEST_CASE("config validation") {
  MRConfig cfg;
  cfg.min_level = 7;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  MRConfig s;
  s.stencil = 1;
  CHECK_THROWS_AS(s.validate(), ParameterError);
}
