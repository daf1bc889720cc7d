#pragma once

// Dyadic cell hierarchy on the unit square. Level l holds 2^l x 2^l square
// cells V_(i,j),l = 2^-l [i, i+1] x [j, j+1]; level 0 is the root.

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace bidomain {

inline constexpr int kMaxLevel = 20;

struct CellIndex {
  int level = 0;
  std::int32_t i = 0;
  std::int32_t j = 0;

  friend constexpr bool operator==(const CellIndex&, const CellIndex&) = default;
  friend constexpr auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct CellGeometry {
  Point center;
  double side = 1.0;
  double area = 1.0;
};

enum class Direction { MinusX, PlusX, MinusY, PlusY };

inline constexpr std::array<Direction, 4> kDirections = {Direction::MinusX, Direction::PlusX,
                                                         Direction::MinusY, Direction::PlusY};

constexpr std::int32_t cells_per_side(int level) { return std::int32_t{1} << level; }

constexpr bool is_valid(const CellIndex& idx) {
  if (idx.level < 0 || idx.level > kMaxLevel) return false;
  const std::int32_t n = cells_per_side(idx.level);
  return idx.i >= 0 && idx.j >= 0 && idx.i < n && idx.j < n;
}

/// Throws IndexError for indices outside I_l.
CellGeometry geometry(const CellIndex& idx);

/// The four refinement cells {(l+1, 2i+e1, 2j+e2)} in the order
/// e = (0,0), (1,0), (0,1), (1,1). Throws IndexError when idx.level >= finest_level.
std::array<CellIndex, 4> children(const CellIndex& idx, int finest_level);

/// Child for a given offset e = (e1, e2) without range checks against a finest level.
constexpr CellIndex child(const CellIndex& idx, int e1, int e2) {
  return {idx.level + 1, 2 * idx.i + e1, 2 * idx.j + e2};
}

/// Throws IndexError for the root.
CellIndex parent(const CellIndex& idx);

/// Same-level neighbour; std::nullopt marks the domain boundary.
std::optional<CellIndex> neighbor(const CellIndex& idx, Direction dir);

/// Unit outward normal of the face of a cell in direction dir.
Point normal(Direction dir);

/// Mirror an index into [0, n) by whole-domain reflection (-1 -> 0, -2 -> 1, n -> n-1, ...).
std::int32_t mirror_index(std::int32_t k, std::int32_t n);

/// Reflect an out-of-domain index back into the index set of its level.
CellIndex mirrored(const CellIndex& idx);

/// Packed 64-bit key (level in the top byte) usable in hash maps.
constexpr std::uint64_t pack(const CellIndex& idx) {
  return (std::uint64_t(idx.level) << 56) | (std::uint64_t(std::uint32_t(idx.i)) << 28) |
         std::uint64_t(std::uint32_t(idx.j));
}

/// All cells of one level in Z (Morton) order, x-bit lowest. This is the order
/// in which a depth-first traversal of a full quadtree visits its leaves.
std::vector<CellIndex> z_order_cells(int level);

/// Row-major position (j * 2^l + i) of a cell within its level.
constexpr std::size_t row_major(const CellIndex& idx) {
  return std::size_t(idx.j) * std::size_t(cells_per_side(idx.level)) + std::size_t(idx.i);
}

}  // namespace bidomain
