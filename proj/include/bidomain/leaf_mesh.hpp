#pragma once

// Flux network over the leaves of a graded tree. Faces between leaves of the
// same level use the plain two-point flux. Across a 2:1 interface the flux is
// evaluated on the fine side, against the predicted average of the virtual
// same-level cousin inside the coarse leaf, and the coarse leaf receives its
// negative.

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bidomain/fv.hpp"
#include "bidomain/tree.hpp"

namespace bidomain {

/// Sparse linear combination sum_k w_k u[leaf_k], sorted by leaf index.
using Expansion = std::vector<std::pair<std::int32_t, double>>;

/// Expresses the average of any cell as a combination of leaf values
/// (leaves: identity; internal nodes: projection; absent cells: prediction).
/// Requires numbered leaves.
class ExpansionCache {
 public:
  explicit ExpansionCache(const MRTree& tree) : tree_(tree) {}
  const Expansion& of(const CellIndex& cell);

 private:
  const MRTree& tree_;
  std::unordered_map<std::uint64_t, Expansion> memo_;
};

/// Leaves in depth-first order become the cells of the mesh. Throws
/// InvariantError on a non-graded interface.
FvMesh compile_leaf_mesh(MRTree& tree, const ModelParams& p);

}  // namespace bidomain
