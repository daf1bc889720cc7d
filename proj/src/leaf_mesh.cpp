#include "bidomain/leaf_mesh.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

namespace {

void accumulate(Expansion& out, const Expansion& term, double weight) {
  for (const auto& [index, w] : term) out.emplace_back(index, weight * w);
}

void combine(Expansion& e) {
  std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t w = 0;
  for (std::size_t r = 0; r < e.size();) {
    std::size_t s = r;
    double sum = 0.0;
    while (s < e.size() && e[s].first == e[r].first) sum += e[s++].second;
    e[w++] = {e[r].first, sum};
    r = s;
  }
  e.resize(w);
}

}  // namespace

const Expansion& ExpansionCache::of(const CellIndex& cell) {
  const CellIndex c = mirrored(cell);
  const std::uint64_t key = pack(c);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  Expansion e;
  const NodeKind kind = tree_.kind(c);
  if (kind == NodeKind::Leaf) {
    e.emplace_back(tree_.find(c)->leaf_id, 1.0);
  } else if (kind == NodeKind::Internal) {
    for (int e2 = 0; e2 < 2; ++e2) {
      for (int e1 = 0; e1 < 2; ++e1) accumulate(e, of(child(c, e1, e2)), 0.25);
    }
  } else {
    if (c.level == 0) throw InvariantError("tree has no root");
    const CellIndex p = parent(c);
    const int e1 = c.i & 1;
    const int e2 = c.j & 1;
    for (int dy = -2; dy <= 2; ++dy) {
      for (int dx = -2; dx <= 2; ++dx) {
        const double w = prediction_weight(dx, dy, e1, e2, tree_.config());
        accumulate(e, of({p.level, p.i + dx, p.j + dy}), w);
      }
    }
  }
  combine(e);
  return memo_.emplace(key, std::move(e)).first->second;
}

FvMesh compile_leaf_mesh(MRTree& tree, const ModelParams& p) {
  FvMesh mesh;
  mesh.finest_level = tree.finest_level();
  mesh.cells = tree.number_leaves();
  mesh.geometry.reserve(mesh.cells.size());
  mesh.area.reserve(mesh.cells.size());
  for (const CellIndex& c : mesh.cells) {
    mesh.geometry.push_back(geometry(c));
    mesh.area.push_back(mesh.geometry.back().area);
  }

  ExpansionCache cache(tree);
  auto add_interface = [&](std::int32_t a, const CellIndex& fine, const CellIndex& ghost) {
    const CellIndex coarse = parent(ghost);
    const TreeNode* b = tree.find(coarse);
    if (!b || b->kind != NodeKind::Leaf) {
      throw InvariantError(fmt::format("non-graded interface between (l={}, i={}, j={}) and "
                                       "(l={}, i={}, j={})",
                                       fine.level, fine.i, fine.j, ghost.level, ghost.i, ghost.j));
    }
    const double t_i = face_coefficient(fine, ghost, Medium::Intra, p).transmissibility();
    const double t_e = face_coefficient(fine, ghost, Medium::Extra, p).transmissibility();
    const Expansion& e = cache.of(ghost);
    const auto first = std::int32_t(mesh.stencil_index.size());
    for (const auto& [index, w] : e) {
      mesh.stencil_index.push_back(index);
      mesh.stencil_weight.push_back(w);
    }
    mesh.faces.push_back({a, b->leaf_id, fine.level, t_i, t_e, first,
                          std::int32_t(mesh.stencil_index.size())});
  };

  for (std::size_t k = 0; k < mesh.cells.size(); ++k) {
    const CellIndex& c = mesh.cells[k];
    const auto a = std::int32_t(k);
    for (Direction dir : {Direction::PlusX, Direction::PlusY}) {
      const auto nb = neighbor(c, dir);
      if (!nb) continue;
      const NodeKind kind = tree.kind(*nb);
      if (kind == NodeKind::Leaf) {
        const double t_i = face_coefficient(c, *nb, Medium::Intra, p).transmissibility();
        const double t_e = face_coefficient(c, *nb, Medium::Extra, p).transmissibility();
        mesh.add_face(a, tree.find(*nb)->leaf_id, c.level, t_i, t_e);
      } else if (kind != NodeKind::Internal) {
        add_interface(a, c, *nb);
      }
    }
    for (Direction dir : {Direction::MinusX, Direction::MinusY}) {
      const auto nb = neighbor(c, dir);
      if (!nb) continue;
      const NodeKind kind = tree.kind(*nb);
      if (kind != NodeKind::Leaf && kind != NodeKind::Internal) add_interface(a, c, *nb);
    }
  }
  mesh.finalize();
  return mesh;
}

}  // namespace bidomain
