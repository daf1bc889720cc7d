#include <doctest.h>

#include <string>

#include "bidomain/config.hpp"
#include "bidomain/errors.hpp"

using namespace bidomain;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text, "test.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults round trip through the INI form") {
  const RunConfig defaults;
  CHECK(parse_config(format_config(defaults)) == defaults);
  CHECK(parse_config("") == defaults);
}

TEST_CASE("edited configuration round trips") {
  RunConfig c;
  c.sim.mode = Mode::MRLts;
  c.sim.model.reaction = false;
  c.sim.model.fiber_angle = 0.3;
  c.sim.stimulus.shape = StimulusProtocol::Shape::Rectangle;
  c.sim.stimulus.current_amplitude = 2.5;
  c.sim.stimulus.current_t_off = 0.01;
  c.sim.mr.finest_level = 7;
  c.sim.mr.min_level = 3;
  c.sim.mr.eps_ref = 1e-3;
  c.sim.cfl_factor = 0.25;
  c.sim.remesh_interval = 4;
  c.sim.cadence = EllipticCadence::SyncOnly;
  c.sim.solver.tolerance = 1e-10;
  c.t_final = 0.02;
  c.snapshot_times = {0.005, 0.02};
  c.output_dir = "out/x";
  CHECK(parse_config(format_config(c)) == c);
}

TEST_CASE("partial files override only the given keys") {
  const RunConfig c = parse_config("[run]\nmode = uniform\n[multiresolution]\nfinest_level = 5\n");
  CHECK(c.sim.mode == Mode::Uniform);
  CHECK(c.sim.mr.finest_level == 5);
  CHECK(c.sim.mr.min_level == RunConfig{}.sim.mr.min_level);
  CHECK(c.sim.model == ModelParams{});
}

TEST_CASE("invalid configurations name the field") {
  CHECK(error_of("[time]\ncfl_factor = 0\n").find("cfl_factor") != std::string::npos);
  CHECK(error_of("[time]\ncfl_factor = -1\n").find("cfl_factor") != std::string::npos);
  CHECK(error_of("[model]\nbeta = abc\n").find("model.beta") != std::string::npos);
  CHECK(error_of("[model]\nbogus = 1\n").find("model.bogus") != std::string::npos);
  CHECK(error_of("[nosuch]\nx = 1\n").find("nosuch.x") != std::string::npos);
  CHECK(error_of("[run]\nmode = fast\n").find("fast") != std::string::npos);
  CHECK(error_of("[run]\nt_final = 0.1\nsnapshot_times = 0.2\n").find("snapshot_times") !=
        std::string::npos);
  CHECK(error_of("[multiresolution]\nfinest_level = 2\nmin_level = 3\n") != "");
  CHECK(error_of("[model]\nreaction = maybe\n").find("reaction") != std::string::npos);
}

TEST_CASE("syntax errors carry the line number") {
  const std::string message = error_of("[run]\nmode = mr\nthis line is broken\n");
  CHECK(message.find("test.ini:3") != std::string::npos);
}

TEST_CASE("missing file is reported") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}
