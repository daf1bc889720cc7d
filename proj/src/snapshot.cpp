#include "bidomain/snapshot.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "bidomain/errors.hpp"
#include "bidomain/tree.hpp"

namespace bidomain {

void write_snapshot(std::ostream& out, const Snapshot& snap) {
  fmt::print(out, "# t={} L={} mode={}\n", snap.time, snap.finest_level, to_string(snap.mode));
  for (const LeafRecord& r : snap.leaves) {
    const CellGeometry g = geometry(r.cell);
    fmt::print(out, "{},{},{},{},{},{},{:.17g},{:.17g},{:.17g}\n", r.cell.level, r.cell.i, r.cell.j,
               g.center.x, g.center.y, g.side, r.v, r.ue, r.w);
  }
}

void write_snapshot_file(const std::string& path, const Snapshot& snap) {
  std::ofstream out(path);
  if (!out) throw HarnessError(fmt::format("cannot write snapshot {}", path));
  write_snapshot(out, snap);
}

namespace {

double parse_number(const std::string& token, const std::string& origin, int line) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw HarnessError(fmt::format("{}:{}: '{}' is not a number", origin, line, token));
  }
}

std::string header_value(const std::string& header, const std::string& key, const std::string& origin) {
  const std::string tag = key + "=";
  std::istringstream in(header.substr(1));
  std::string word;
  while (in >> word) {
    if (word.rfind(tag, 0) == 0) return word.substr(tag.size());
  }
  throw HarnessError(fmt::format("{}:1: header lacks '{}'", origin, tag));
}

}  // namespace

Snapshot read_snapshot(std::istream& in, const std::string& origin) {
  Snapshot snap;
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw HarnessError(fmt::format("{}:1: missing '# t=... L=... mode=...' header", origin));
  }
  snap.time = parse_number(header_value(line, "t", origin), origin, 1);
  snap.finest_level = int(parse_number(header_value(line, "L", origin), origin, 1));
  try {
    snap.mode = parse_mode(header_value(line, "mode", origin));
  } catch (const ConfigError& e) {
    throw HarnessError(fmt::format("{}:1: {}", origin, e.what()));
  }
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string token;
    while (std::getline(row, token, ',')) fields.push_back(token);
    if (fields.size() != 9) {
      throw HarnessError(fmt::format("{}:{}: expected 9 fields, found {}", origin, number, fields.size()));
    }
    LeafRecord r;
    r.cell.level = int(parse_number(fields[0], origin, number));
    r.cell.i = std::int32_t(parse_number(fields[1], origin, number));
    r.cell.j = std::int32_t(parse_number(fields[2], origin, number));
    if (!is_valid(r.cell) || r.cell.level > snap.finest_level) {
      throw HarnessError(fmt::format("{}:{}: invalid cell index", origin, number));
    }
    r.v = parse_number(fields[6], origin, number);
    r.ue = parse_number(fields[7], origin, number);
    r.w = parse_number(fields[8], origin, number);
    snap.leaves.push_back(r);
  }
  return snap;
}

Snapshot read_snapshot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError(fmt::format("cannot read snapshot {}", path));
  return read_snapshot(in, path);
}

namespace {

MRTree snapshot_tree(const Snapshot& snap, const MRConfig& base) {
  MRConfig cfg = base;
  cfg.finest_level = std::max(1, snap.finest_level);
  cfg.min_level = 0;
  std::vector<CellIndex> cells;
  std::vector<Values> values;
  cells.reserve(snap.leaves.size());
  values.reserve(snap.leaves.size());
  for (const LeafRecord& r : snap.leaves) {
    cells.push_back(r.cell);
    values.push_back({r.v, r.ue, r.w});
  }
  try {
    return MRTree::from_leaves(cfg, cells, values);
  } catch (const InvariantError& e) {
    throw HarnessError(fmt::format("snapshot at t={} is not a partition: {}", snap.time, e.what()));
  }
}

}  // namespace

void validate_partition(const Snapshot& snap) {
  const MRTree tree = snapshot_tree(snap, {});
  const double area = tree.leaf_area_sum();
  if (std::abs(area - 1.0) > 1e-12) {
    throw HarnessError(fmt::format("snapshot leaves cover area {} instead of 1", area));
  }
}

ErrorNorms error_norms(std::span<const double> a, std::span<const double> b,
                       std::span<const double> weights) {
  if (a.size() != b.size() || a.size() != weights.size()) {
    throw HarnessError(fmt::format("cannot compare fields of sizes {} and {}", a.size(), b.size()));
  }
  double d1 = 0.0, n1 = 0.0, d2 = 0.0, n2 = 0.0, dinf = 0.0, ninf = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = std::abs(a[k] - b[k]);
    d1 += weights[k] * d;
    n1 += weights[k] * std::abs(b[k]);
    d2 += weights[k] * d * d;
    n2 += weights[k] * b[k] * b[k];
    dinf = std::max(dinf, d);
    ninf = std::max(ninf, std::abs(b[k]));
  }
  ErrorNorms e;
  e.l1 = n1 > 0.0 ? d1 / n1 : d1;
  e.l2 = n2 > 0.0 ? std::sqrt(d2 / n2) : std::sqrt(d2);
  e.linf = ninf > 0.0 ? dinf / ninf : dinf;
  return e;
}

ErrorNorms error_norms(const LevelField& a, const LevelField& b) {
  if (a.level != b.level) {
    throw HarnessError(fmt::format("fields on levels {} and {} are not comparable", a.level, b.level));
  }
  const std::vector<double> weights(a.values.size(), std::ldexp(1.0, -2 * a.level));
  return error_norms(a.values, b.values, weights);
}

LevelField snapshot_field(const Snapshot& snap, Component component, int level, const MRConfig& cfg) {
  if (level < 0 || level > snap.finest_level) {
    throw HarnessError(fmt::format("cannot decode a level-{} snapshot on level {}", snap.finest_level, level));
  }
  MRTree tree = snapshot_tree(snap, cfg);
  return tree.decode_component(int(component), level);
}

}  // namespace bidomain
