#include "bidomain/tree.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bidomain/errors.hpp"

namespace bidomain {

namespace {

constexpr int kPageShift = 4;

std::string describe(const CellIndex& c) { return fmt::format("(l={}, i={}, j={})", c.level, c.i, c.j); }

}  // namespace

LevelGrid::LevelGrid(int level) : level_(level), shift_(std::min(level, kPageShift)) {
  pages_per_side_ = cells_per_side(level) >> shift_;
  pages_.resize(std::size_t(pages_per_side_) * std::size_t(pages_per_side_));
}

TreeNode& LevelGrid::slot_or_create(std::int32_t i, std::int32_t j) {
  auto& page = pages_[std::size_t(j >> shift_) * std::size_t(pages_per_side_) + std::size_t(i >> shift_)];
  if (page.empty()) page.resize(std::size_t(1) << (2 * shift_));
  const std::int32_t mask = (1 << shift_) - 1;
  return page[std::size_t(((j & mask) << shift_) + (i & mask))];
}

double compression_rate(double fine_count, int finest_level, std::size_t leaf_count) {
  return fine_count / (std::ldexp(fine_count, -(finest_level + 1)) + double(leaf_count));
}

MRTree::MRTree(const MRConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  levels_.reserve(std::size_t(cfg_.finest_level) + 1);
  for (int l = 0; l <= cfg_.finest_level; ++l) levels_.emplace_back(l);
  create({0, 0, 0}).kind = NodeKind::Leaf;
  leaf_count_ = 1;
}

MRTree MRTree::uniform(const MRConfig& cfg, int level, std::span<const Values> leaf_values) {
  const auto cells = z_order_cells(level);
  return from_leaves(cfg, cells, leaf_values);
}

MRTree MRTree::from_leaves(const MRConfig& cfg, std::span<const CellIndex> cells,
                           std::span<const Values> values) {
  if (cells.size() != values.size()) throw InvariantError("leaf and value counts differ");
  if (cells.empty()) throw InvariantError("no leaves given");
  MRTree tree(cfg);
  tree.slot({0, 0, 0})->kind = NodeKind::Absent;
  tree.leaf_count_ = 0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const CellIndex& c = cells[k];
    if (!is_valid(c) || c.level > cfg.finest_level) {
      throw InvariantError(fmt::format("leaf {} outside the tree", describe(c)));
    }
    for (int l = 0; l < c.level; ++l) {
      const int shift = c.level - l;
      TreeNode& a = tree.create({l, c.i >> shift, c.j >> shift});
      if (a.kind == NodeKind::Leaf) {
        throw InvariantError(fmt::format("leaf {} overlaps a coarser leaf", describe(c)));
      }
      a.kind = NodeKind::Internal;
    }
    TreeNode& n = tree.create(c);
    if (n.kind != NodeKind::Absent) {
      throw InvariantError(fmt::format("leaf {} duplicated or overlapping", describe(c)));
    }
    n.kind = NodeKind::Leaf;
    n.u = values[k];
    ++tree.leaf_count_;
  }
  // Every internal node must have four real children.
  std::vector<CellIndex> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    if (tree.kind(c) != NodeKind::Internal) continue;
    for (const CellIndex& ch : children(c, cfg.finest_level)) {
      if (!tree.is_real(ch)) {
        throw InvariantError(fmt::format("leaves do not tile the domain near {}", describe(ch)));
      }
      stack.push_back(ch);
    }
  }
  tree.touch();
  tree.project_all();
  return tree;
}

TreeNode& MRTree::create(const CellIndex& c) {
  return levels_[std::size_t(c.level)].slot_or_create(c.i, c.j);
}

std::vector<CellIndex> MRTree::leaves() const { return structure().leaves; }

const MRTree::Structure& MRTree::structure() const {
  if (cached_version_ == version_) return structure_;
  structure_.leaves.clear();
  structure_.leaves.reserve(leaf_count_);
  structure_.internal.assign(std::size_t(cfg_.finest_level) + 1, {});
  std::vector<CellIndex> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    const NodeKind k = kind(c);
    if (k == NodeKind::Leaf) {
      structure_.leaves.push_back(c);
    } else if (k == NodeKind::Internal) {
      structure_.internal[std::size_t(c.level)].push_back(c);
      for (int e = 3; e >= 0; --e) stack.push_back(child(c, e & 1, e >> 1));
    }
  }
  cached_version_ = version_;
  return structure_;
}

std::vector<CellIndex> MRTree::number_leaves() {
  auto out = leaves();
  for (std::size_t k = 0; k < out.size(); ++k) slot(out[k])->leaf_id = std::int32_t(k);
  return out;
}

std::size_t MRTree::real_count() const {
  std::size_t count = 0;
  std::vector<CellIndex> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    const NodeKind k = kind(c);
    if (k == NodeKind::Leaf || k == NodeKind::Internal) ++count;
    if (k == NodeKind::Internal) {
      for (const CellIndex& ch : children(c, cfg_.finest_level)) stack.push_back(ch);
    }
  }
  return count;
}

int MRTree::deepest_leaf_level() const {
  int level = 0;
  for (const CellIndex& c : leaves()) level = std::max(level, c.level);
  return level;
}

int MRTree::coarsest_leaf_level() const {
  int level = cfg_.finest_level;
  for (const CellIndex& c : leaves()) level = std::min(level, c.level);
  return level;
}

double MRTree::leaf_area_sum() const {
  double sum = 0.0;
  for (const CellIndex& c : leaves()) sum += geometry(c).area;
  return sum;
}

CompressionMetrics MRTree::compression() const {
  const double n = std::ldexp(1.0, 2 * cfg_.finest_level);
  return {compression_rate(n, cfg_.finest_level, leaf_count_), leaf_count_, n};
}

void MRTree::set_values(const CellIndex& c, const Values& u) {
  TreeNode* n = find(c);
  if (!n || !n->real()) throw IndexError(fmt::format("no real node at {}", describe(c)));
  n->u = u;
  if (!virtuals_.empty()) clear_virtuals();
}

Values MRTree::component_scales() const {
  Values scale{1e-30, 1e-30, 1e-30};
  for (const CellIndex& c : structure().leaves) {
    const TreeNode* n = find(c);
    for (int k = 0; k < kComponents; ++k) scale[k] = std::max(scale[k], std::abs(n->u[k]));
  }
  return scale;
}

Values MRTree::value_at(const CellIndex& cell) {
  if (cell.level < 0 || cell.level > cfg_.finest_level) {
    throw IndexError(fmt::format("cell {} outside levels [0, {}]", describe(cell), cfg_.finest_level));
  }
  const CellIndex c = mirrored(cell);
  if (const TreeNode* n = find(c)) return n->u;
  const CellIndex p = parent(c);
  const auto st = stencil(p);
  std::array<Quad, kComponents> pred;
  for (int k = 0; k < kComponents; ++k) pred[k] = predict_children(st[k], cfg_);
  for (int e = 0; e < 4; ++e) {
    const CellIndex ch = child(p, e & 1, e >> 1);
    TreeNode& n = create(ch);
    if (n.kind != NodeKind::Absent) continue;
    n.kind = NodeKind::Virtual;
    for (int k = 0; k < kComponents; ++k) n.u[k] = pred[k][e];
    virtuals_.push_back(ch);
  }
  return find(c)->u;
}

std::array<Stencil, kComponents> MRTree::stencil(const CellIndex& p) {
  std::array<Stencil, kComponents> st;
  const std::int32_t n = cells_per_side(p.level);
  LevelGrid& grid = levels_[std::size_t(p.level)];
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      const std::int32_t i = p.i + dx, j = p.j + dy;
      const TreeNode* node = i >= 0 && j >= 0 && i < n && j < n ? grid.slot(i, j) : nullptr;
      const Values u =
          node && node->kind != NodeKind::Absent ? node->u : value_at({p.level, i, j});
      for (int k = 0; k < kComponents; ++k) st[k][dy + 2][dx + 2] = u[k];
    }
  }
  return st;
}

std::array<CellIndex, 4> MRTree::refine(const CellIndex& leaf) {
  TreeNode* n = find(leaf);
  if (!n || n->kind != NodeKind::Leaf) {
    throw InvariantError(fmt::format("refine: {} is not a leaf", describe(leaf)));
  }
  const auto kids = children(leaf, cfg_.finest_level);
  const auto st = stencil(leaf);
  std::array<Quad, kComponents> pred;
  for (int c = 0; c < kComponents; ++c) pred[c] = predict_children(st[c], cfg_);
  for (int k = 0; k < 4; ++k) {
    TreeNode& ch = create(kids[k]);
    ch = TreeNode{};
    ch.kind = NodeKind::Leaf;
    for (int c = 0; c < kComponents; ++c) ch.u[c] = pred[c][k];
  }
  n = find(leaf);
  n->kind = NodeKind::Internal;
  n->significant = false;
  n->details = {};
  leaf_count_ += 3;
  touch();
  return kids;
}

void MRTree::coarsen(const CellIndex& p) {
  TreeNode* n = find(p);
  if (!n || n->kind != NodeKind::Internal) {
    throw InvariantError(fmt::format("coarsen: {} is not an internal node", describe(p)));
  }
  if (!virtuals_.empty()) clear_virtuals();
  Values sum{};
  for (const CellIndex& ch : children(p, cfg_.finest_level)) {
    if (kind(ch) != NodeKind::Leaf) {
      throw InvariantError(fmt::format("coarsen: child {} is not a leaf", describe(ch)));
    }
    const TreeNode* c = find(ch);
    for (int k = 0; k < kComponents; ++k) sum[k] += c->u[k];
  }
  for (const CellIndex& ch : children(p, cfg_.finest_level)) *slot(ch) = TreeNode{};
  n->kind = NodeKind::Leaf;
  for (int k = 0; k < kComponents; ++k) n->u[k] = 0.25 * sum[k];
  n->details = {};
  n->significant = false;
  leaf_count_ -= 3;
  touch();
}

void MRTree::project_all() {
  clear_virtuals();
  const Structure& st = structure();
  for (int m = cfg_.finest_level - 1; m >= 0; --m) {
    for (const CellIndex& p : st.internal[std::size_t(m)]) {
      Values sum{};
      for (int e = 0; e < 4; ++e) {
        const Values& u = slot(child(p, e & 1, e >> 1))->u;
        for (int k = 0; k < kComponents; ++k) sum[k] += u[k];
      }
      TreeNode* n = slot(p);
      for (int k = 0; k < kComponents; ++k) n->u[k] = 0.25 * sum[k];
    }
  }
}

void MRTree::clear_virtuals() {
  for (const CellIndex& c : virtuals_) {
    TreeNode* n = slot(c);
    if (n && n->kind == NodeKind::Virtual) *n = TreeNode{};
  }
  virtuals_.clear();
}

std::array<Stencil, kComponents> MRTree::dense_stencil(const CellIndex& p,
                                                       const std::vector<Values>& dense,
                                                       const std::vector<std::uint8_t>& present) {
  std::array<Stencil, kComponents> st;
  const std::int32_t n = cells_per_side(p.level);
  for (int dy = -2; dy <= 2; ++dy) {
    const std::int32_t j = mirror_index(p.j + dy, n);
    for (int dx = -2; dx <= 2; ++dx) {
      const std::int32_t i = mirror_index(p.i + dx, n);
      const std::size_t at = std::size_t(j) * std::size_t(n) + std::size_t(i);
      const Values u = present[at] ? dense[at] : value_at({p.level, i, j});
      for (int k = 0; k < kComponents; ++k) st[k][dy + 2][dx + 2] = u[k];
    }
  }
  return st;
}

std::size_t MRTree::compute_details(const Values& scales, double eps_ref) {
  constexpr int kDenseLevels = 10;
  const std::vector<std::vector<CellIndex>>& internal = structure().internal;
  std::size_t significant = 0;
  for (int m = 0; m < cfg_.finest_level; ++m) {
    const auto& parents = internal[std::size_t(m)];
    if (parents.empty()) continue;
    const bool dense = m <= kDenseLevels;
    if (dense) {
      // Real nodes of level m: the root or the children of level m-1 internal nodes.
      const std::size_t count = std::size_t(1) << (2 * m);
      dense_.resize(count);
      present_.assign(count, 0);
      const std::int32_t side = cells_per_side(m);
      auto put = [&](const CellIndex& c) {
        const std::size_t at = std::size_t(c.j) * std::size_t(side) + std::size_t(c.i);
        dense_[at] = slot(c)->u;
        present_[at] = 1;
      };
      if (m == 0) {
        put({0, 0, 0});
      } else {
        for (const CellIndex& q : internal[std::size_t(m - 1)]) {
          for (int e = 0; e < 4; ++e) put(child(q, e & 1, e >> 1));
        }
      }
    }
    const double eps = threshold_for_level(m, eps_ref, cfg_.finest_level);
    for (const CellIndex& p : parents) {
      const auto st = dense ? dense_stencil(p, dense_, present_) : stencil(p);
      std::array<Quad, kComponents> truth;
      for (int e = 0; e < 4; ++e) {
        const Values& u = slot(child(p, e & 1, e >> 1))->u;
        for (int k = 0; k < kComponents; ++k) truth[k][e] = u[k];
      }
      TreeNode* n = slot(p);
      double level_max = 0.0;
      for (int k = 0; k < kComponents; ++k) {
        n->details.d[k] = details_from_residuals(residuals(st[k], truth[k], cfg_));
        level_max = std::max(level_max, n->details.max_abs(k) / scales[k]);
      }
      n->significant = level_max >= eps;
      if (n->significant) ++significant;
    }
  }
  return significant;
}

bool MRTree::can_coarsen(const CellIndex& p) const {
  const int m = p.level + 1;
  const std::int32_t n = cells_per_side(m);
  for (std::int32_t j = std::max(0, 2 * p.j - 2); j <= std::min(n - 1, 2 * p.j + 3); ++j) {
    for (std::int32_t i = std::max(0, 2 * p.i - 2); i <= std::min(n - 1, 2 * p.i + 3); ++i) {
      if (kind({m, i, j}) == NodeKind::Internal) return false;
    }
  }
  return true;
}

std::size_t MRTree::coarsen_by_threshold() {
  const std::vector<std::vector<CellIndex>> internal = structure().internal;
  std::size_t removed = 0;
  for (int m = cfg_.finest_level - 1; m >= std::max(cfg_.min_level, 0); --m) {
    for (const CellIndex& p : internal[std::size_t(m)]) {
      const TreeNode* n = find(p);
      if (n->significant) continue;
      if (m > 0 && find(parent(p))->significant) continue;
      bool leaf_children = true;
      for (const CellIndex& ch : children(p, cfg_.finest_level)) {
        leaf_children = leaf_children && kind(ch) == NodeKind::Leaf;
      }
      if (!leaf_children || !can_coarsen(p)) continue;
      coarsen(p);
      ++removed;
    }
  }
  if (removed > 0) clear_virtuals();
  return removed;
}

std::size_t MRTree::make_real(const CellIndex& c, std::vector<CellIndex>& work) {
  CellIndex a = c;
  while (!is_real(a)) a = parent(a);
  if (kind(a) != NodeKind::Leaf) {
    throw InvariantError(fmt::format("no leaf above {}", describe(c)));
  }
  std::size_t count = 0;
  while (a.level < c.level) {
    const auto kids = refine(a);
    ++count;
    for (const CellIndex& k : kids) work.push_back(k);
    const int shift = c.level - a.level - 1;
    a = {a.level + 1, c.i >> shift, c.j >> shift};
  }
  return count;
}

std::size_t MRTree::grade_from(std::vector<CellIndex> work) {
  std::size_t count = 0;
  while (!work.empty()) {
    const CellIndex node = work.back();
    work.pop_back();
    if (node.level == 0 || !is_real(node)) continue;
    const CellIndex p = parent(node);
    const std::int32_t n = cells_per_side(p.level);
    for (std::int32_t j = std::max(0, p.j - 2); j <= std::min(n - 1, p.j + 2); ++j) {
      for (std::int32_t i = std::max(0, p.i - 2); i <= std::min(n - 1, p.i + 2); ++i) {
        if (!is_real({p.level, i, j})) count += make_real({p.level, i, j}, work);
      }
    }
  }
  return count;
}

std::size_t MRTree::ensure_graded() {
  std::vector<CellIndex> work;
  std::vector<CellIndex> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    const NodeKind k = kind(c);
    if (k != NodeKind::Leaf && k != NodeKind::Internal) continue;
    work.push_back(c);
    if (k == NodeKind::Internal) {
      for (int e = 3; e >= 0; --e) stack.push_back(child(c, e & 1, e >> 1));
    }
  }
  std::reverse(work.begin(), work.end());
  return grade_from(std::move(work));
}

std::size_t MRTree::add_safety_zone() {
  std::vector<CellIndex> targets;
  for (const CellIndex& c : structure().leaves) {
    if (c.level == 0 || c.level >= cfg_.finest_level) continue;
    if (find(parent(c))->significant) targets.push_back(c);
  }
  std::vector<CellIndex> work;
  for (const CellIndex& c : targets) {
    for (const CellIndex& k : refine(c)) work.push_back(k);
  }
  std::reverse(work.begin(), work.end());
  return targets.size() + grade_from(std::move(work));
}

std::size_t MRTree::materialize_virtual_leaves() {
  const std::size_t before = virtuals_.size();
  for (const CellIndex& c : leaves()) {
    const std::int32_t n = cells_per_side(c.level);
    for (std::int32_t j = std::max(0, c.j - 2); j <= std::min(n - 1, c.j + 2); ++j) {
      for (std::int32_t i = std::max(0, c.i - 2); i <= std::min(n - 1, c.i + 2); ++i) {
        value_at({c.level, i, j});
      }
    }
  }
  return virtuals_.size() - before;
}

RemeshReport MRTree::remesh(double eps_ref) {
  RemeshReport report;
  project_all();
  report.significant = compute_details(component_scales(), eps_ref);
  report.coarsened = coarsen_by_threshold();
  clear_virtuals();
  report.refined = add_safety_zone();
  clear_virtuals();
  return report;
}

bool MRTree::is_graded() const {
  std::vector<CellIndex> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    if (kind(c) != NodeKind::Internal) continue;
    const std::int32_t n = cells_per_side(c.level);
    for (std::int32_t j = std::max(0, c.j - 2); j <= std::min(n - 1, c.j + 2); ++j) {
      for (std::int32_t i = std::max(0, c.i - 2); i <= std::min(n - 1, c.i + 2); ++i) {
        if (!is_real({c.level, i, j})) return false;
      }
    }
    for (const CellIndex& ch : children(c, cfg_.finest_level)) stack.push_back(ch);
  }
  return true;
}

void MRTree::check_invariants() const {
  if (!is_real({0, 0, 0})) throw InvariantError("root is missing");
  std::size_t leaves_seen = 0;
  std::vector<CellIndex> stack{{0, 0, 0}};
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    const NodeKind k = kind(c);
    if (k == NodeKind::Leaf) {
      ++leaves_seen;
      if (c.level < cfg_.finest_level) {
        for (const CellIndex& ch : children(c, cfg_.finest_level)) {
          if (is_real(ch)) throw InvariantError(fmt::format("leaf {} has real children", describe(c)));
        }
      }
      continue;
    }
    for (const CellIndex& ch : children(c, cfg_.finest_level)) {
      if (!is_real(ch)) {
        throw InvariantError(fmt::format("internal node {} lacks child {}", describe(c), describe(ch)));
      }
      stack.push_back(ch);
    }
  }
  if (leaves_seen != leaf_count_) throw InvariantError("leaf counter out of sync");
  for (const CellIndex& c : virtuals_) {
    const TreeNode* n = slot(c);
    if (!n || n->kind != NodeKind::Virtual) continue;
    if (n->significant) throw InvariantError("virtual node carries details");
    if (c.level < cfg_.finest_level) {
      for (const CellIndex& ch : children(c, cfg_.finest_level)) {
        if (is_real(ch)) throw InvariantError(fmt::format("virtual node {} has real children", describe(c)));
      }
    }
  }
  if (!is_graded()) throw InvariantError("tree is not graded");
}

LevelField MRTree::decode_component(int component, int level) {
  if (component < 0 || component >= kComponents) throw IndexError("component out of range");
  LevelField f(level);
  for (std::int32_t j = 0; j < f.side(); ++j) {
    for (std::int32_t i = 0; i < f.side(); ++i) f.at(i, j) = value_at({level, i, j})[component];
  }
  return f;
}

}  // namespace bidomain
