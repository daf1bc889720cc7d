#include <doctest.h>

#include <set>

#include "bidomain/errors.hpp"
#include "bidomain/grid.hpp"

using namespace bidomain;

TEST_CASE("geometry of dyadic cells") {
  const CellGeometry g = geometry({3, 2, 5});
  CHECK(g.side == doctest::Approx(0.125));
  CHECK(g.area == doctest::Approx(1.0 / 64.0));
  CHECK(g.center.x == doctest::Approx(0.3125));
  CHECK(g.center.y == doctest::Approx(0.6875));
  CHECK_THROWS_AS(geometry({2, 4, 0}), IndexError);
  CHECK_THROWS_AS(geometry({2, -1, 0}), IndexError);
}

TEST_CASE("children and parent are inverse") {
  const CellIndex c{4, 7, 11};
  const auto kids = children(c, 6);
  CHECK(kids[0] == CellIndex{5, 14, 22});
  CHECK(kids[1] == CellIndex{5, 15, 22});
  CHECK(kids[2] == CellIndex{5, 14, 23});
  CHECK(kids[3] == CellIndex{5, 15, 23});
  for (const CellIndex& k : kids) CHECK(parent(k) == c);
  CHECK_THROWS_AS(children({6, 0, 0}, 6), IndexError);
  CHECK_THROWS_AS(parent({0, 0, 0}), IndexError);
}

TEST_CASE("neighbours stop at the boundary") {
  CHECK(neighbor({2, 0, 0}, Direction::MinusX) == std::nullopt);
  CHECK(neighbor({2, 0, 0}, Direction::MinusY) == std::nullopt);
  CHECK(*neighbor({2, 0, 0}, Direction::PlusX) == CellIndex{2, 1, 0});
  CHECK(*neighbor({2, 3, 3}, Direction::MinusY) == CellIndex{2, 3, 2});
  CHECK(neighbor({2, 3, 3}, Direction::PlusY) == std::nullopt);
}

TEST_CASE("mirror reflection") {
  CHECK(mirror_index(-1, 8) == 0);
  CHECK(mirror_index(-2, 8) == 1);
  CHECK(mirror_index(8, 8) == 7);
  CHECK(mirror_index(9, 8) == 6);
  CHECK(mirror_index(3, 8) == 3);
  CHECK(mirrored({3, -1, 9}) == CellIndex{3, 0, 6});
}

TEST_CASE("z order visits every cell once, x bit lowest") {
  const auto cells = z_order_cells(3);
  REQUIRE(cells.size() == 64);
  CHECK(cells[1] == CellIndex{3, 1, 0});
  CHECK(cells[2] == CellIndex{3, 0, 1});
  CHECK(cells[4] == CellIndex{3, 2, 0});
  std::set<std::size_t> seen;
  for (const CellIndex& c : cells) seen.insert(row_major(c));
  CHECK(seen.size() == 64);
}

TEST_CASE("pack is injective across levels") {
  std::set<std::uint64_t> keys;
  for (int l = 0; l <= 4; ++l) {
    for (const CellIndex& c : z_order_cells(l)) keys.insert(pack(c));
  }
  CHECK(keys.size() == 1 + 4 + 16 + 64 + 256);
}
