#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bidomain/errors.hpp"
#include "bidomain/snapshot.hpp"

using namespace bidomain;
using doctest::Approx;

namespace {

Snapshot uniform_snapshot(int level, double (*f)(double, double)) {
  Snapshot s;
  s.time = 0.125;
  s.step = 17;
  s.finest_level = level;
  s.mode = Mode::Uniform;
  for (const CellIndex& c : z_order_cells(level)) {
    const Point x = geometry(c).center;
    s.leaves.push_back({c, f(x.x, x.y), -f(x.x, x.y), 1.0 + x.x});
  }
  return s;
}

double wave(double x, double y) { return std::sin(3.0 * x) * std::cos(2.0 * y) + 1.0 / 3.0; }

}  // namespace

TEST_CASE("snapshot round trip is exact") {
  const Snapshot s = uniform_snapshot(3, wave);
  std::stringstream buffer;
  write_snapshot(buffer, s);
  const Snapshot r = read_snapshot(buffer);
  CHECK(r.time == s.time);
  CHECK(r.finest_level == 3);
  CHECK(r.mode == Mode::Uniform);
  REQUIRE(r.leaves.size() == s.leaves.size());
  for (std::size_t k = 0; k < s.leaves.size(); ++k) {
    CHECK(r.leaves[k].cell == s.leaves[k].cell);
    CHECK(r.leaves[k].v == s.leaves[k].v);
    CHECK(r.leaves[k].ue == s.leaves[k].ue);
    CHECK(r.leaves[k].w == s.leaves[k].w);
  }
}

TEST_CASE("snapshot header and row layout") {
  std::stringstream buffer;
  write_snapshot(buffer, uniform_snapshot(1, wave));
  std::string header, row;
  std::getline(buffer, header);
  std::getline(buffer, row);
  CHECK(header.rfind("# t=", 0) == 0);
  CHECK(header.find("L=1") != std::string::npos);
  CHECK(header.find("mode=uniform") != std::string::npos);
  CHECK(row.rfind("1,0,0,0.25,0.25,0.5,", 0) == 0);
}

TEST_CASE("malformed snapshots are rejected") {
  std::stringstream missing;
  Snapshot s = uniform_snapshot(2, wave);
  s.leaves.pop_back();
  CHECK_THROWS_AS(validate_partition(s), HarnessError);
  write_snapshot(missing, s);
  const Snapshot parsed = read_snapshot(missing);
  CHECK(parsed.leaves.size() == 15);
  CHECK_THROWS_AS(validate_partition(parsed), HarnessError);

  std::stringstream garbage("# t=0 L=2 mode=mr\n1,0,0,0.25,0.25,0.5,1,2,3\n2,0,x\n");
  try {
    read_snapshot(garbage, "bad.csv");
    FAIL("expected a HarnessError");
  } catch (const HarnessError& e) {
    CHECK(std::string(e.what()).find("bad.csv:3") != std::string::npos);
  }

  Snapshot overlap = uniform_snapshot(1, wave);
  overlap.leaves.push_back({{0, 0, 0}, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(validate_partition(overlap), HarnessError);
}

TEST_CASE("error norms") {
  const std::vector<double> b{1.0, -2.0, 4.0};
  const std::vector<double> a{1.5, -2.0, 3.0};
  const std::vector<double> w{0.5, 0.25, 0.25};
  const ErrorNorms e = error_norms(a, b, w);
  CHECK(e.l1 == Approx((0.5 * 0.5 + 0.25 * 1.0) / (0.5 + 0.5 + 1.0)));
  CHECK(e.l2 == Approx(std::sqrt((0.5 * 0.25 + 0.25) / (0.5 + 1.0 + 4.0))));
  CHECK(e.linf == Approx(1.0 / 4.0));
  const ErrorNorms same = error_norms(b, b, w);
  CHECK(same.l1 == 0.0);
  CHECK(same.linf == 0.0);
  const std::vector<double> zero(3, 0.0);
  CHECK(error_norms(a, zero, w).linf == Approx(3.0));
}

TEST_CASE("snapshot fields on coarser and finer grids") {
  const Snapshot s = uniform_snapshot(4, wave);
  const LevelField fine = snapshot_field(s, Component::V, 4);
  const auto cells = z_order_cells(4);
  for (std::size_t k = 0; k < cells.size(); ++k) CHECK(fine.at(cells[k].i, cells[k].j) == s.leaves[k].v);
  const LevelField coarse = snapshot_field(s, Component::Ue, 2);
  double mean = 0.0;
  for (const LeafRecord& r : s.leaves) {
    if (r.cell.i < 4 && r.cell.j < 4) mean += r.ue / 16.0;
  }
  CHECK(coarse.at(0, 0) == Approx(mean).epsilon(1e-14));
  CHECK_THROWS_AS(snapshot_field(s, Component::W, 5), HarnessError);
}

TEST_CASE("snapshot field of an adaptive snapshot predicts inside coarse leaves") {
  Snapshot s;
  s.finest_level = 2;
  s.mode = Mode::MR;
  for (const CellIndex& c : z_order_cells(1)) s.leaves.push_back({c, 7.0, 0.0, 1.0});
  const LevelField f = snapshot_field(s, Component::V, 2);
  for (std::int32_t j = 0; j < 4; ++j) {
    for (std::int32_t i = 0; i < 4; ++i) CHECK(f.at(i, j) == Approx(7.0));
  }
}
