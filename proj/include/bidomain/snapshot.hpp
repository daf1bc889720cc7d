#pragma once

// Snapshot files and error norms.
//
//   # t=<time> L=<L> mode=<mode>
//   l,i,j,x_center,y_center,side,v,u_e,w      (one row per leaf, traversal order)

#include <iosfwd>
#include <span>
#include <string>

#include "bidomain/multires.hpp"
#include "bidomain/simulation.hpp"

namespace bidomain {

void write_snapshot(std::ostream& out, const Snapshot& snap);
void write_snapshot_file(const std::string& path, const Snapshot& snap);

/// Throws HarnessError with the line number on malformed input.
Snapshot read_snapshot(std::istream& in, const std::string& origin = "<snapshot>");
Snapshot read_snapshot_file(const std::string& path);

/// Throws HarnessError unless the leaves tile the unit square without overlap.
void validate_partition(const Snapshot& snap);

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// L1 = sum |K||a-b| / sum |K||b|, L2 = sqrt(sum |K|(a-b)^2 / sum |K| b^2),
/// Linf = max|a-b| / max|b|. A vanishing reference norm leaves that norm unnormalized.
ErrorNorms error_norms(std::span<const double> a, std::span<const double> b,
                       std::span<const double> weights);
ErrorNorms error_norms(const LevelField& a, const LevelField& b);

enum class Component { V = 0, Ue = 1, W = 2 };

/// One component on the uniform grid of `level`: prediction below the leaves,
/// projection above them. Throws HarnessError if level exceeds the snapshot's L.
LevelField snapshot_field(const Snapshot& snap, Component component, int level,
                          const MRConfig& cfg = {});

}  // namespace bidomain
