#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bidomain/errors.hpp"
#include "bidomain/runner.hpp"

using namespace bidomain;
using doctest::Approx;

namespace {

RunConfig small_run(Mode mode) {
  RunConfig c;
  c.sim.mode = mode;
  c.sim.mr.finest_level = 4;
  c.sim.mr.min_level = 2;
  c.t_final = 2e-4;
  c.snapshot_times = {1e-4, 2e-4};
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("bidomain_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("snapshot steps") {
  const auto steps = snapshot_steps({0.0, 0.1, 0.25}, 0.01);
  CHECK(steps == std::vector<std::int64_t>{0, 10, 25});
  CHECK(snapshot_steps({1e-6 * 3.0000001}, 1e-6) == std::vector<std::int64_t>{3});
}

TEST_CASE("runs are deterministic") {
  const RunResult a = run_simulation(small_run(Mode::MR));
  const RunResult b = run_simulation(small_run(Mode::MR));
  REQUIRE(a.snapshots.size() == 2);
  REQUIRE(b.snapshots.size() == 2);
  CHECK(a.steps == b.steps);
  for (std::size_t s = 0; s < 2; ++s) {
    REQUIRE(a.snapshots[s].leaves.size() == b.snapshots[s].leaves.size());
    for (std::size_t k = 0; k < a.snapshots[s].leaves.size(); ++k) {
      CHECK(a.snapshots[s].leaves[k].v == b.snapshots[s].leaves[k].v);
      CHECK(a.snapshots[s].leaves[k].ue == b.snapshots[s].leaves[k].ue);
    }
  }
  CHECK(a.snapshots[1].time == Approx(2e-4).epsilon(0.02));
}

TEST_CASE("observer sees every advance") {
  int calls = 0;
  const RunResult r = run_simulation(small_run(Mode::Uniform), [&](const Simulation&) { ++calls; });
  CHECK(calls == r.steps);
}

TEST_CASE("run directories and comparison") {
  const auto ref_dir = scratch("ref");
  const auto run_dir = scratch("run");
  const RunResult ref = run_simulation(small_run(Mode::Uniform));
  const RunResult run = run_simulation(small_run(Mode::MR));
  write_run(ref, ref_dir.string());
  write_run(run, run_dir.string());
  CHECK(std::filesystem::exists(run_dir / "config.ini"));
  CHECK(std::filesystem::exists(run_dir / "metrics.csv"));
  const auto snaps = read_run_snapshots(run_dir.string());
  REQUIRE(snaps.size() == 2);
  CHECK(snaps[1].leaves.size() == run.snapshots[1].leaves.size());

  const MetricsFile m = compare_runs(run_dir.string(), ref_dir.string());
  REQUIRE(m.rows.size() == 2);
  REQUIRE(m.rows[1].err_v);
  CHECK(m.rows[1].err_v->l1 < 5e-3);
  CHECK(m.nu.has_value());

  const MetricsFile self = compare_runs(ref_dir.string(), ref_dir.string());
  REQUIRE(self.rows[1].err_v);
  CHECK(self.rows[1].err_v->l1 == 0.0);

  CHECK_THROWS_AS(compare_runs(run_dir.string(), (ref_dir / "missing").string()), HarnessError);
  std::filesystem::remove_all(ref_dir);
  std::filesystem::remove_all(run_dir);
}

TEST_CASE("metrics file round trip") {
  MetricsFile m;
  m.rows.push_back({0.1, 412, 7.25, ErrorNorms{1e-3, 2e-3, 3e-2}, ErrorNorms{4e-4, 5e-4, 6e-3}});
  m.rows.push_back({0.2, 400, 7.5, std::nullopt, std::nullopt});
  m.nu = 2.5;
  m.wall_clock = 12.75;
  m.finest_level = 6;
  m.comparison_level = 6;
  m.mode = "mr";
  const auto path = scratch("metrics") ;
  std::filesystem::create_directories(path);
  write_metrics((path / "metrics.csv").string(), m);
  const MetricsFile r = read_metrics((path / "metrics.csv").string());
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].leaf_count == 412);
  CHECK(r.rows[0].eta == 7.25);
  REQUIRE(r.rows[0].err_v);
  CHECK(r.rows[0].err_v->linf == 3e-2);
  CHECK(r.rows[0].err_ue->l2 == 5e-4);
  CHECK_FALSE(r.rows[1].err_v);
  CHECK(r.nu == 2.5);
  CHECK(r.wall_clock == 12.75);
  CHECK(r.finest_level == 6);
  CHECK(r.mode == "mr");
  std::filesystem::remove_all(path);
}
