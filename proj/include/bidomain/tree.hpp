#pragma once

// Graded dynamic quadtree of cell averages. Nodes live in one paged sparse
// grid per level, so lookups by CellIndex are O(1).
//
// Grading: for every real node at level m > 0, all in-domain cells of the
// 5x5 neighbourhood of its parent (level m-1) are real. This keeps every
// prediction stencil of a real parent inside the tree and implies that
// edge-adjacent leaves differ by at most one level.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bidomain/grid.hpp"
#include "bidomain/multires.hpp"

namespace bidomain {

enum class NodeKind : std::uint8_t { Absent, Leaf, Internal, Virtual };

using Values = std::array<double, kComponents>;

struct TreeNode {
  Values u{};
  DetailSet details{};
  NodeKind kind = NodeKind::Absent;
  bool significant = false;
  std::int32_t leaf_id = -1;

  bool real() const { return kind == NodeKind::Leaf || kind == NodeKind::Internal; }
};

/// Sparse storage for one level, allocated in 16x16 pages.
class LevelGrid {
 public:
  explicit LevelGrid(int level = 0);

  int level() const { return level_; }
  /// nullptr when the page is not allocated.
  TreeNode* slot(std::int32_t i, std::int32_t j) {
    auto& page = pages_[std::size_t(j >> shift_) * std::size_t(pages_per_side_) + std::size_t(i >> shift_)];
    if (page.empty()) return nullptr;
    const std::int32_t mask = (1 << shift_) - 1;
    return &page[std::size_t(((j & mask) << shift_) + (i & mask))];
  }
  const TreeNode* slot(std::int32_t i, std::int32_t j) const {
    return const_cast<LevelGrid*>(this)->slot(i, j);
  }
  TreeNode& slot_or_create(std::int32_t i, std::int32_t j);

 private:
  int level_;
  int shift_;
  std::int32_t pages_per_side_;
  std::vector<std::vector<TreeNode>> pages_;
};

struct CompressionMetrics {
  double eta = 0.0;
  std::size_t leaf_count = 0;
  double fine_count = 0.0;  // N = 4^L
};

/// eta = N / (2^{-(L+1)} N + #leaves).
double compression_rate(double fine_count, int finest_level, std::size_t leaf_count);

struct RemeshReport {
  std::size_t coarsened = 0;  // sibling quadruples removed
  std::size_t refined = 0;    // leaves split (safety zone and grading)
  std::size_t significant = 0;

  bool changed() const { return coarsened + refined > 0; }
};

class MRTree {
 public:
  /// A tree holding only the root leaf.
  explicit MRTree(const MRConfig& cfg);

  /// Full tree down to `level` with leaf values from `leaf_values` (Z order of that level).
  static MRTree uniform(const MRConfig& cfg, int level, std::span<const Values> leaf_values);

  /// Tree with the given leaves. Throws InvariantError unless they tile the domain.
  static MRTree from_leaves(const MRConfig& cfg, std::span<const CellIndex> cells,
                            std::span<const Values> values);

  const MRConfig& config() const { return cfg_; }
  int finest_level() const { return cfg_.finest_level; }

  /// nullptr for absent cells (virtual nodes are returned).
  const TreeNode* find(const CellIndex& c) const {
    const TreeNode* n = slot(c);
    return n && n->kind != NodeKind::Absent ? n : nullptr;
  }
  TreeNode* find(const CellIndex& c) {
    TreeNode* n = slot(c);
    return n && n->kind != NodeKind::Absent ? n : nullptr;
  }
  NodeKind kind(const CellIndex& c) const {
    const TreeNode* n = slot(c);
    return n ? n->kind : NodeKind::Absent;
  }
  bool is_real(const CellIndex& c) const {
    const TreeNode* n = slot(c);
    return n && n->real();
  }
  bool is_leaf(const CellIndex& c) const { return kind(c) == NodeKind::Leaf; }

  /// Leaves in depth-first order with children (0,0), (1,0), (0,1), (1,1).
  std::vector<CellIndex> leaves() const;
  /// Same order; stores the position in each leaf's leaf_id.
  std::vector<CellIndex> number_leaves();
  std::size_t leaf_count() const { return leaf_count_; }
  std::size_t real_count() const;
  int deepest_leaf_level() const;
  int coarsest_leaf_level() const;
  double leaf_area_sum() const;
  CompressionMetrics compression() const;

  void set_values(const CellIndex& c, const Values& u);
  /// Global max-norm of each component over the leaves (floored at 1e-30).
  Values component_scales() const;

  /// Average on any cell up to the finest level. Cells outside the domain are
  /// mirrored; absent cells are predicted from their parent's stencil and
  /// memoized as virtual nodes.
  Values value_at(const CellIndex& c);
  std::array<Stencil, kComponents> stencil(const CellIndex& parent);

  /// Split a leaf into four predicted children. Returns the children.
  std::array<CellIndex, 4> refine(const CellIndex& leaf);
  /// Merge four leaf children back into their parent (which takes their mean).
  void coarsen(const CellIndex& parent);

  /// Internal averages from the leaves, bottom-up.
  void project_all();
  void clear_virtuals();

  /// Details of every internal node and their significance against eps_l.
  /// Returns the number of significant nodes.
  std::size_t compute_details(const Values& scales, double eps_ref);

  /// Remove sibling quadruples whose parent and grandparent are not
  /// significant and whose removal keeps the tree graded. Levels are swept
  /// from fine to coarse; nothing is removed below min_level.
  std::size_t coarsen_by_threshold();

  /// Refine every leaf below the finest level whose parent is significant,
  /// then restore grading. Returns the number of refinements.
  std::size_t add_safety_zone();

  /// Restore grading by refining coarse neighbours. Returns the number of refinements.
  std::size_t ensure_graded();

  /// Create the 5x5 same-level neighbourhood of every leaf as virtual nodes.
  std::size_t materialize_virtual_leaves();

  /// Projection, details, thresholding, safety zone and grading in one pass.
  RemeshReport remesh(double eps_ref);

  bool is_graded() const;
  /// Throws InvariantError on a broken invariant (orphans, incomplete
  /// children, virtual nodes with children, grading).
  void check_invariants() const;

  /// Cell averages of one component on a full level (prediction below the leaves,
  /// projection above them).
  LevelField decode_component(int component, int level);

 private:
  TreeNode* slot(const CellIndex& c) {
    if (c.level > cfg_.finest_level || !is_valid(c)) return nullptr;
    return levels_[std::size_t(c.level)].slot(c.i, c.j);
  }
  const TreeNode* slot(const CellIndex& c) const { return const_cast<MRTree*>(this)->slot(c); }
  TreeNode& create(const CellIndex& c);

  // Leaves and internal nodes per level in depth-first order, rebuilt after
  // structural changes.
  struct Structure {
    std::vector<CellIndex> leaves;
    std::vector<std::vector<CellIndex>> internal;
  };
  const Structure& structure() const;
  void touch() { ++version_; }
  /// Stencil from a dense copy of the real nodes of one level.
  std::array<Stencil, kComponents> dense_stencil(const CellIndex& p, const std::vector<Values>& dense,
                                                 const std::vector<std::uint8_t>& present);
  bool can_coarsen(const CellIndex& parent) const;
  std::size_t grade_from(std::vector<CellIndex> work);
  std::size_t make_real(const CellIndex& c, std::vector<CellIndex>& work);

  MRConfig cfg_;
  std::vector<LevelGrid> levels_;
  std::vector<CellIndex> virtuals_;
  std::size_t leaf_count_ = 0;
  std::uint64_t version_ = 0;
  mutable std::uint64_t cached_version_ = ~std::uint64_t{0};
  mutable Structure structure_;
  std::vector<Values> dense_;
  std::vector<std::uint8_t> present_;
};

}  // namespace bidomain
