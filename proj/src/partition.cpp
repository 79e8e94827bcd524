// partition.cpp

#include "trimul/partition.hpp"

#include <algorithm>
#include <cmath>

namespace trimul {
namespace {

constexpr long long kCoordOffset = 1ll << 20;
constexpr long long kCoordMask = (1ll << 21) - 1;

// Extracts every axis-fiber of `s` whose cardinality strictly exceeds
// threshold; extracted entries land in `taken`, the rest replace `s`.
void extract_heavy_fibers(WeightedIndexSet& s, int axis, double threshold,
                          WeightedIndexSet& taken) {
  const auto counts = fiber_sizes(s, axis);
  WeightedIndexSet keep;
  keep.d = s.d;
  taken.d = s.d;
  for (const auto& e : s.entries) {
    if (static_cast<double>(counts.at(e.first[axis])) > threshold)
      taken.entries.push_back(e);
    else
      keep.entries.push_back(e);
  }
  s = std::move(keep);
}

int append_node(PartitionTree& tree, int parent, std::string op,
                WeightedIndexSet set, Certificate cert) {
  PartitionNode node;
  node.op = std::move(op);
  node.set = std::move(set);
  node.cert = cert;
  tree.nodes.push_back(std::move(node));
  const int idx = static_cast<int>(tree.nodes.size()) - 1;
  if (parent >= 0) tree.nodes[parent].children.push_back(idx);
  return idx;
}

Certificate slice_cert(int axis, double threshold) {
  Certificate c;
  c.kind = Certificate::Kind::slice;
  c.axis = axis;
  c.threshold = threshold;
  return c;
}

Certificate residual_cert(double threshold) {
  Certificate c;
  c.kind = Certificate::Kind::residual;
  c.threshold = threshold;
  return c;
}

// Axis processed by slice part p: k3 fibers first, then k1, then k2.
constexpr int kSliceAxisOrder[3] = {2, 0, 1};

}  // namespace

long long pack_coord(const Eigen::VectorXi& k) {
  const int d = static_cast<int>(k.size());
  if (d < 1 || d > 3)
    throw std::invalid_argument("pack_coord: d must be 1..3");
  long long packed = 0;
  for (int i = 0; i < d; ++i) {
    if (std::abs(static_cast<long long>(k[i])) >= kCoordOffset)
      throw std::invalid_argument("pack_coord: |component| < 2^20 required");
    packed |= ((static_cast<long long>(k[i]) + kCoordOffset) & kCoordMask)
              << (21 * i);
  }
  return packed;
}

Eigen::VectorXi unpack_coord(long long packed, int d) {
  if (d < 1 || d > 3)
    throw std::invalid_argument("unpack_coord: d must be 1..3");
  Eigen::VectorXi k(d);
  for (int i = 0; i < d; ++i)
    k[i] = static_cast<int>(((packed >> (21 * i)) & kCoordMask) - kCoordOffset);
  return k;
}

TripleKey triple_from_frame(const Eigen::VectorXi& n, int d) {
  if (n.size() != 3 * d)
    throw std::invalid_argument("triple_from_frame: n must have 3d entries");
  TripleKey key;
  for (int slot = 0; slot < 3; ++slot)
    key[slot] = pack_coord(n.segment(slot * d, d));
  return key;
}

double WeightedIndexSet::sup_abs() const {
  double s = 0.0;
  for (const auto& e : entries) s = std::max(s, std::abs(e.second));
  return s;
}

void WeightedIndexSet::sort_canonical() {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (entries[i - 1].first == entries[i].first)
      throw std::invalid_argument("WeightedIndexSet: duplicate key");
}

bool WeightedIndexSet::contains(const TripleKey& k) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), k,
      [](const auto& e, const TripleKey& key) { return e.first < key; });
  return it != entries.end() && it->first == k;
}

WeightedIndexSet make_weighted_set(
    int d, std::vector<std::pair<TripleKey, double>> entries) {
  WeightedIndexSet s;
  s.d = d;
  s.entries = std::move(entries);
  s.sort_canonical();
  return s;
}

std::map<long long, std::size_t> fiber_sizes(const WeightedIndexSet& s,
                                             int axis) {
  if (axis < 0 || axis > 2)
    throw std::invalid_argument("fiber_sizes: axis must be 0..2");
  std::map<long long, std::size_t> counts;
  for (const auto& e : s.entries) ++counts[e.first[axis]];
  return counts;
}

LevelSets level_sets(const WeightedIndexSet& b, int r_max) {
  if (r_max < 0) throw std::invalid_argument("level_sets: r_max >= 0");
  LevelSets out;
  out.sup = b.sup_abs();
  out.residual.d = b.d;
  if (out.sup == 0.0) {
    out.residual.entries = b.entries;
    return out;
  }
  for (const auto& e : b.entries) {
    const double a = std::abs(e.second);
    int r = -1;
    if (a > 0.0) {
      r = static_cast<int>(std::floor(-std::log2(a / out.sup)));
      // Band membership uses the exact comparisons, so nudge the log
      // estimate until (2^{-r-1} sup, 2^{-r} sup] holds.
      while (r > 0 && a > std::ldexp(out.sup, -r)) --r;
      while (a <= std::ldexp(out.sup, -r - 1)) ++r;
    }
    if (r < 0 || r > r_max) {
      out.residual.entries.push_back(e);
    } else {
      auto& band = out.bands[r];
      band.d = b.d;
      band.entries.push_back(e);
    }
  }
  return out;
}

SliceSplit slice_split(const WeightedIndexSet& s, double threshold) {
  SliceSplit out;
  out.threshold = threshold;
  WeightedIndexSet rem = s;
  for (int p = 0; p < 3; ++p) {
    out.s[p].d = s.d;
    extract_heavy_fibers(rem, kSliceAxisOrder[p], threshold, out.s[p]);
  }
  out.s[3] = std::move(rem);
  return out;
}

bool certificate_holds(const Certificate& cert, const WeightedIndexSet& s) {
  switch (cert.kind) {
    case Certificate::Kind::root:
      return true;
    case Certificate::Kind::level_band: {
      const double hi = std::ldexp(cert.sup, -cert.r);
      const double lo = std::ldexp(cert.sup, -cert.r - 1);
      for (const auto& e : s.entries) {
        const double a = std::abs(e.second);
        if (!(a > lo && a <= hi)) return false;
      }
      return true;
    }
    case Certificate::Kind::slice: {
      const auto counts = fiber_sizes(s, cert.axis);
      for (const auto& f : counts)
        if (!(static_cast<double>(f.second) > cert.threshold)) return false;
      return true;
    }
    case Certificate::Kind::residual: {
      for (int axis = 0; axis < 3; ++axis) {
        const auto counts = fiber_sizes(s, axis);
        for (const auto& f : counts)
          if (static_cast<double>(f.second) > cert.threshold) return false;
      }
      return true;
    }
    case Certificate::Kind::size_leaf:
      return static_cast<double>(s.size()) <= cert.target;
    case Certificate::Kind::diagonal: {
      for (int axis = 0; axis < 3; ++axis) {
        const auto counts = fiber_sizes(s, axis);
        for (const auto& f : counts)
          if (f.second > 1) return false;
      }
      return true;
    }
  }
  return false;
}

std::string certificate_kind_name(Certificate::Kind k) {
  switch (k) {
    case Certificate::Kind::root: return "root";
    case Certificate::Kind::level_band: return "level_band";
    case Certificate::Kind::slice: return "slice";
    case Certificate::Kind::residual: return "residual";
    case Certificate::Kind::size_leaf: return "size_leaf";
    case Certificate::Kind::diagonal: return "diagonal";
  }
  return "unknown";
}

std::vector<int> PartitionTree::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i)
    if (nodes[i].children.empty()) out.push_back(i);
  return out;
}

std::vector<int> halve_to_target(PartitionTree& tree, int parent,
                                 double target) {
  if (!(target >= 1.0))
    throw std::invalid_argument("halve_to_target: target >= 1");
  std::vector<int> leaves;
  std::vector<int> stack = {parent};
  while (!stack.empty()) {
    const int idx = stack.back();
    stack.pop_back();
    const std::size_t n = tree.nodes[idx].set.size();
    if (n == 0) continue;
    if (static_cast<double>(n) <= target) {
      Certificate c;
      c.kind = Certificate::Kind::size_leaf;
      c.target = target;
      tree.nodes[idx].cert = c;
      leaves.push_back(idx);
      continue;
    }

    const double th = std::pow(static_cast<double>(n), 8.0 / 9.0);
    SliceSplit sp = slice_split(tree.nodes[idx].set, th);
    const bool any_part =
        !sp.s[0].empty() || !sp.s[1].empty() || !sp.s[2].empty();
    int res_holder = idx;
    if (any_part) {
      for (int p = 0; p < 3; ++p)
        if (!sp.s[p].empty())
          leaves.push_back(append_node(tree, idx, "slice-split",
                                       std::move(sp.s[p]),
                                       slice_cert(kSliceAxisOrder[p], th)));
      if (sp.s[3].empty()) continue;
      res_holder = append_node(tree, idx, "slice-split", sp.s[3],
                               residual_cert(th));
    }
    // Balanced lexicographic bisection of the residual.
    WeightedIndexSet& res = tree.nodes[res_holder].set;
    if (static_cast<double>(res.size()) <= target) {
      stack.push_back(res_holder);
      continue;
    }
    const std::size_t mid = res.size() / 2;
    WeightedIndexSet h1, h2;
    h1.d = res.d;
    h2.d = res.d;
    h1.entries.assign(res.entries.begin(), res.entries.begin() + mid);
    h2.entries.assign(res.entries.begin() + mid, res.entries.end());
    Certificate trivial;
    stack.push_back(
        append_node(tree, res_holder, "halve", std::move(h1), trivial));
    stack.push_back(
        append_node(tree, res_holder, "halve", std::move(h2), trivial));
  }
  return leaves;
}

std::vector<WeightedIndexSet> diagonal_decompose(const WeightedIndexSet& s,
                                                 double fiber_bound) {
  if (!(fiber_bound >= 1.0))
    throw std::invalid_argument("diagonal_decompose: fiber_bound >= 1");
  // Rank of each entry within its fiber, per axis, in canonical order.
  std::array<std::vector<std::size_t>, 3> rank;
  std::size_t max_rank = 0;
  for (int axis = 0; axis < 3; ++axis) {
    std::map<long long, std::size_t> seen;
    rank[axis].resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::size_t r = seen[s.entries[i].first[axis]]++;
      if (static_cast<double>(r + 1) > fiber_bound)
        throw refusal_error(
            "diagonal_decompose: a fiber exceeds the fiber bound");
      rank[axis][i] = r;
      max_rank = std::max(max_rank, r);
    }
  }

  const std::size_t base = max_rank + 1;
  std::map<std::size_t, WeightedIndexSet> classes;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t id =
        (rank[0][i] * base + rank[1][i]) * base + rank[2][i];
    auto& cls = classes[id];
    cls.d = s.d;
    cls.entries.push_back(s.entries[i]);
  }
  std::vector<WeightedIndexSet> out;
  out.reserve(classes.size());
  for (auto& c : classes) out.push_back(std::move(c.second));
  return out;
}

PartitionTree full_partition(const WeightedIndexSet& b, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("full_partition: q > 0");
  PartitionTree tree;
  {
    WeightedIndexSet root_set = b;
    root_set.sort_canonical();
    append_node(tree, -1, "root", std::move(root_set), Certificate{});
  }

  LevelSets ls = level_sets(tree.nodes[0].set);
  for (auto& band_kv : ls.bands) {
    Certificate band_cert;
    band_cert.kind = Certificate::Kind::level_band;
    band_cert.r = band_kv.first;
    band_cert.sup = ls.sup;
    const double card = static_cast<double>(band_kv.second.size());
    const int band_idx = append_node(tree, 0, "level-set",
                                     std::move(band_kv.second), band_cert);

    const double th = std::pow(card, 8.0 / 9.0);
    const double target = std::max(1.0, std::pow(card, 1.0 / 8.0));
    const double fiber_bound = std::max(1.0, std::pow(card, 1.0 / 9.0));

    SliceSplit sp = slice_split(tree.nodes[band_idx].set, th);
    std::vector<int> size_leaves;
    if (sp.s[0].empty() && sp.s[1].empty() && sp.s[2].empty()) {
      size_leaves = halve_to_target(tree, band_idx, target);
    } else {
      for (int p = 0; p < 3; ++p)
        if (!sp.s[p].empty())
          append_node(tree, band_idx, "slice-split", std::move(sp.s[p]),
                      slice_cert(kSliceAxisOrder[p], th));
      if (!sp.s[3].empty()) {
        const int res_idx = append_node(tree, band_idx, "slice-split",
                                        std::move(sp.s[3]), residual_cert(th));
        size_leaves = halve_to_target(tree, res_idx, target);
      }
    }

    for (int leaf : size_leaves) {
      if (tree.nodes[leaf].cert.kind != Certificate::Kind::size_leaf) continue;
      const double n_leaf = static_cast<double>(tree.nodes[leaf].set.size());
      if (n_leaf == 0.0) continue;
      const double th2 = std::pow(n_leaf, 8.0 / 9.0);
      SliceSplit sp2 = slice_split(tree.nodes[leaf].set, th2);
      const bool any_part =
          !sp2.s[0].empty() || !sp2.s[1].empty() || !sp2.s[2].empty();

      Certificate diag_cert;
      diag_cert.kind = Certificate::Kind::diagonal;
      diag_cert.fiber_bound = fiber_bound;

      if (!any_part) {
        auto classes = diagonal_decompose(tree.nodes[leaf].set, fiber_bound);
        if (classes.size() == 1) {
          tree.nodes[leaf].cert = diag_cert;
        } else {
          for (auto& cls : classes)
            append_node(tree, leaf, "diagonal", std::move(cls), diag_cert);
        }
        continue;
      }
      for (int p = 0; p < 3; ++p)
        if (!sp2.s[p].empty())
          append_node(tree, leaf, "slice-split", std::move(sp2.s[p]),
                      slice_cert(kSliceAxisOrder[p], th2));
      if (!sp2.s[3].empty()) {
        auto classes = diagonal_decompose(sp2.s[3], fiber_bound);
        if (classes.size() == 1) {
          append_node(tree, leaf, "diagonal", std::move(sp2.s[3]), diag_cert);
        } else {
          const int res_idx = append_node(tree, leaf, "slice-split",
                                          std::move(sp2.s[3]),
                                          residual_cert(th2));
          for (auto& cls : classes)
            append_node(tree, res_idx, "diagonal", std::move(cls), diag_cert);
        }
      }
    }
  }

  if (!ls.residual.empty())
    append_node(tree, 0, "level-set", std::move(ls.residual), Certificate{});
  return tree;
}

std::string verify_tree(const PartitionTree& tree) {
  if (tree.nodes.empty()) return "tree has no nodes";
  for (int i = 0; i < static_cast<int>(tree.nodes.size()); ++i) {
    const PartitionNode& node = tree.nodes[i];
    if (!certificate_holds(node.cert, node.set))
      return "node " + std::to_string(i) + ": certificate " +
             certificate_kind_name(node.cert.kind) + " fails";
    if (node.children.empty()) continue;

    std::vector<std::pair<TripleKey, double>> merged;
    for (int ch : node.children) {
      if (ch <= i || ch >= static_cast<int>(tree.nodes.size()))
        return "node " + std::to_string(i) + ": child index out of order";
      const auto& e = tree.nodes[ch].set.entries;
      merged.insert(merged.end(), e.begin(), e.end());
    }
    std::sort(merged.begin(), merged.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    if (merged.size() != node.set.size())
      return "node " + std::to_string(i) + ": children do not cover parent";
    for (std::size_t k = 0; k < merged.size(); ++k) {
      if (!(merged[k].first == node.set.entries[k].first) ||
          merged[k].second != node.set.entries[k].second)
        return "node " + std::to_string(i) +
               ": children disagree with parent entries";
    }
  }
  return "";
}

}  // namespace trimul
