#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bidomain/errors.hpp"
#include "bidomain/grid.hpp"
#include "bidomain/model.hpp"

using namespace bidomain;
using doctest::Approx;

TEST_CASE("membrane current at reference points") {
  const ModelParams p;
  CHECK(i_ion(50.0, 1.0, p) == Approx(-0.1).epsilon(1e-12));
  CHECK(i_ion(0.0, 1.0, p) == 0.0);
  // Linear leak only when the gate is closed.
  CHECK(i_ion(100.0, 0.0, p) == Approx(0.05).epsilon(1e-12));
}

TEST_CASE("gate relaxes towards the step function") {
  const ModelParams p;
  CHECK(h_gate(0.0, 0.0, p) == Approx(1.0 / (2.0e4 * 1.5)).epsilon(1e-12));
  CHECK(h_gate(50.0, 1.0, p) == Approx(-1.0 / (2.0e4 * 7.5)).epsilon(1e-12));
  CHECK(w_inf(0.099, p) == 1.0);
  CHECK(w_inf(0.1, p) == 0.0);
  CHECK(eta_inf(0.05, p) == p.eta3);
  CHECK(eta_inf(0.5, p) == p.eta4);
}

TEST_CASE("rotated conductivity tensors") {
  const ModelParams p;
  const Tensor2 mi = conductivity_tensor({}, Medium::Intra, p);
  CHECK(mi.xx == Approx(3.3));
  CHECK(mi.xy == Approx(-2.7));
  CHECK(mi.yy == Approx(3.3));
  const auto ev = mi.eigenvalues();
  CHECK(ev[0] == Approx(0.6));
  CHECK(ev[1] == Approx(6.0));
  const Point mx = mi.apply({1.0, 0.0});
  CHECK(std::hypot(mx.x, mx.y) == Approx(4.2638).epsilon(1e-4));
  const Tensor2 me = conductivity_tensor({}, Medium::Extra, p);
  CHECK(me.xx == Approx(18.0));
  CHECK(me.xy == Approx(-6.0));
  CHECK(me.spectral_norm() == Approx(24.0));
}

TEST_CASE("parameter validation names the field") {
  ModelParams p;
  p.beta = -1.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("beta"), ParameterError);
  ModelParams q;
  q.sigma_et = 0.0;
  CHECK_THROWS_AS(conductivity_tensor({}, Medium::Extra, q), ParameterError);
}

TEST_CASE("initial data covers the disc") {
  const StimulusProtocol s;
  double mass = 0.0;
  for (const CellIndex& c : z_order_cells(7)) {
    const CellGeometry g = geometry(c);
    mass += g.area * initial_cell_average(g, s).v;
  }
  CHECK(mass == Approx(100.0 * s.shape_area()).epsilon(2e-3));
  CHECK(initial_state({0.5, 0.5}, s).v == 100.0);
  CHECK(initial_state({0.9, 0.9}, s).v == 0.0);
  CHECK(initial_state({0.9, 0.9}, s).w == 1.0);
}

TEST_CASE("applied current has zero discrete mean") {
  StimulusProtocol s;
  s.current_amplitude = 20.0;
  s.current_t_on = 0.0;
  s.current_t_off = 1.0;
  std::vector<CellGeometry> cells;
  for (const CellIndex& c : z_order_cells(5)) cells.push_back(geometry(c));
  const auto iapp = applied_current_cells(0.5, cells, s);
  double sum = 0.0, peak = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    sum += cells[k].area * iapp[k];
    peak = std::max(peak, iapp[k]);
  }
  CHECK(std::abs(sum) < 1e-14);
  CHECK(peak > 0.0);
  const auto off = applied_current_cells(2.0, cells, s);
  CHECK(std::all_of(off.begin(), off.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("stimulus validation") {
  StimulusProtocol s;
  s.radius = 0.0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  StimulusProtocol t;
  t.current_t_on = 1.0;
  t.current_t_off = 0.5;
  CHECK_THROWS_AS(t.validate(), ParameterError);
}
