#include "bidomain/grid.hpp"

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

namespace {

void require_valid(const CellIndex& idx) {
  if (!is_valid(idx)) {
    throw IndexError(fmt::format("cell index (l={}, i={}, j={}) outside the dyadic index set",
                                 idx.level, idx.i, idx.j));
  }
}

}  // namespace

CellGeometry geometry(const CellIndex& idx) {
  require_valid(idx);
  // 2^-l is exact in binary floating point.
  const double h = 1.0 / double(cells_per_side(idx.level));
  return {{(idx.i + 0.5) * h, (idx.j + 0.5) * h}, h, h * h};
}

std::array<CellIndex, 4> children(const CellIndex& idx, int finest_level) {
  require_valid(idx);
  if (idx.level >= finest_level) {
    throw IndexError(fmt::format("cannot refine level {} beyond finest level {}", idx.level,
                                 finest_level));
  }
  return {child(idx, 0, 0), child(idx, 1, 0), child(idx, 0, 1), child(idx, 1, 1)};
}

CellIndex parent(const CellIndex& idx) {
  require_valid(idx);
  if (idx.level == 0) throw IndexError("the root cell has no parent");
  return {idx.level - 1, idx.i / 2, idx.j / 2};
}

std::optional<CellIndex> neighbor(const CellIndex& idx, Direction dir) {
  require_valid(idx);
  CellIndex n = idx;
  switch (dir) {
    case Direction::MinusX: --n.i; break;
    case Direction::PlusX: ++n.i; break;
    case Direction::MinusY: --n.j; break;
    case Direction::PlusY: ++n.j; break;
  }
  if (!is_valid(n)) return std::nullopt;
  return n;
}

Point normal(Direction dir) {
  switch (dir) {
    case Direction::MinusX: return {-1.0, 0.0};
    case Direction::PlusX: return {1.0, 0.0};
    case Direction::MinusY: return {0.0, -1.0};
    case Direction::PlusY: return {0.0, 1.0};
  }
  return {};
}

std::int32_t mirror_index(std::int32_t k, std::int32_t n) {
  // Coarse levels can need more than one reflection (n = 1 or 2 with a width-2 stencil).
  while (k < 0 || k >= n) {
    if (k < 0) k = -1 - k;
    if (k >= n) k = 2 * n - 1 - k;
  }
  return k;
}

CellIndex mirrored(const CellIndex& idx) {
  const std::int32_t n = cells_per_side(idx.level);
  return {idx.level, mirror_index(idx.i, n), mirror_index(idx.j, n)};
}

std::vector<CellIndex> z_order_cells(int level) {
  if (level < 0 || level > kMaxLevel) throw IndexError(fmt::format("invalid level {}", level));
  const std::size_t count = std::size_t(1) << (2 * level);
  std::vector<CellIndex> out;
  out.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    std::int32_t i = 0, j = 0;
    for (int b = 0; b < level; ++b) {
      i |= std::int32_t((m >> (2 * b)) & 1u) << b;
      j |= std::int32_t((m >> (2 * b + 1)) & 1u) << b;
    }
    out.push_back({level, i, j});
  }
  return out;
}

}  // namespace bidomain
