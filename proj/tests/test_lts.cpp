#include <doctest.h>

#include <cmath>

#include "bidomain/errors.hpp"
#include "bidomain/simulation.hpp"

using namespace bidomain;
using doctest::Approx;

namespace {

SimulationOptions options(Mode mode, int L, int lmin, bool reaction) {
  SimulationOptions o;
  o.mode = mode;
  o.mr.finest_level = L;
  o.mr.min_level = lmin;
  o.model.reaction = reaction;
  return o;
}

double mass(const Simulation& s) {
  double m = 0.0;
  for (std::size_t k = 0; k < s.mesh().size(); ++k) m += s.mesh().area[k] * s.state().v[k];
  return m;
}

}  // namespace

TEST_CASE("level time steps") {
  const double dt = 1.017229e-6;
  CHECK(dt_for_level(4, 6, dt) == 4.0 * dt);
  CHECK(dt_for_level(0, 9, dt) == 512.0 * dt);
  CHECK(dt_for_level(6, 6, dt) == dt);
  LtsSchedule s{6, 2, dt, 2};
  CHECK(s.cycle_steps() == 16);
  CHECK(s.stride(5) == 2);
  CHECK(s.starts_step(4, 8));
  CHECK_FALSE(s.starts_step(4, 6));
  CHECK(s.ends_step(4, 11));
  CHECK_FALSE(s.ends_step(4, 12));
}

TEST_CASE("interface flux and ledger") {
  const std::vector<double> fine{0.25, -1.0, 0.5};
  CHECK(interface_flux(fine) == Approx(0.25));
  InterfaceFluxLedger ledger;
  ledger.reset(3);
  FvFace f;
  f.a = 0;
  f.b = 2;
  ledger.deposit(f, 1.5, 0.1);
  ledger.deposit(f, -0.5, 0.2);
  CHECK(ledger.sum() == Approx(0.0));
  CHECK(ledger.take(0) == Approx(-0.05));
  CHECK(ledger.take(0) == 0.0);
  CHECK(ledger.take(2) == Approx(0.05));
}

TEST_CASE("face flux") {
  FvMesh mesh;
  mesh.cells = {{1, 0, 0}, {1, 1, 0}};
  mesh.add_face(0, 1, 1, 2.0, 3.0);
  const std::vector<double> u{1.0, 4.0};
  CHECK(face_flux(mesh, mesh.faces[0], 2.0, u) == Approx(6.0));
}

TEST_CASE("local time stepping conserves the transmembrane mass") {
  Simulation sim(options(Mode::MRLts, 5, 2, false));
  const double m0 = mass(sim);
  for (int k = 0; k < 8; ++k) sim.advance();
  CHECK(sim.step() == 8 * 8);
  CHECK(std::abs(mass(sim) - m0) <= 1e-12 * std::abs(m0));
}

TEST_CASE("local time stepping with a single level is the global scheme") {
  Simulation lts(options(Mode::MRLts, 4, 4, true));
  Simulation mr(options(Mode::MR, 4, 4, true));
  CHECK(lts.steps_per_advance() == 1);
  for (int k = 0; k < 20; ++k) {
    lts.advance();
    mr.advance();
  }
  REQUIRE(lts.mesh().size() == mr.mesh().size());
  for (std::size_t k = 0; k < mr.mesh().size(); ++k) {
    CHECK(std::abs(lts.state().v[k] - mr.state().v[k]) <= 1e-10);
    CHECK(std::abs(lts.state().w[k] - mr.state().w[k]) <= 1e-10);
  }
}

TEST_CASE("oversized steps raise InstabilityError with the level") {
  SimulationOptions o = options(Mode::MRLts, 5, 2, true);
  o.cfl_factor = 4.0;
  try {
    Simulation sim(o);
    for (int k = 0; k < 4; ++k) sim.advance();
    FAIL("expected an InstabilityError");
  } catch (const InstabilityError& e) {
    CHECK(e.level() >= 2);
    CHECK(e.level() <= 5);
  }
}
