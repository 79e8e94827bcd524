// partition.hpp
//
// Combinatorics of the piecewise bound: dyadic level sets of a weighted
// index family, slice splitting by fiber cardinality with C^{8/9}
// thresholds, alternating bisection down to C^{1/8}, and the greedy
// diagonal coloring into coordinate-injective classes. Every tree node
// carries a certificate re-checkable from its contents alone.

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "trimul/common.hpp"
#include "trimul/wavelet.hpp"

namespace trimul {

// A translation triple (k1, k2, k3), each k_i in Z^d packed into one
// integer (see pack_coord; d <= 3 with |component| < 2^20).
using TripleKey = std::array<long long, 3>;

long long pack_coord(const Eigen::VectorXi& k);
Eigen::VectorXi unpack_coord(long long packed, int d);

// Splits a frame translation n in Z^{3d} into its three Z^d blocks.
TripleKey triple_from_frame(const Eigen::VectorXi& n, int d);

struct WeightedIndexSet {
  int d = 1;
  // Sorted by key; keys unique.
  std::vector<std::pair<TripleKey, double>> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  double sup_abs() const;
  void sort_canonical();
  bool contains(const TripleKey& k) const;
};

WeightedIndexSet make_weighted_set(
    int d, std::vector<std::pair<TripleKey, double>> entries);

// Number of entries sharing each distinct value of coordinate slot
// `axis` (0-based). The fiber over a value is its set of complementary
// pairs; sizes equal entry counts because keys are unique.
std::map<long long, std::size_t> fiber_sizes(const WeightedIndexSet& s,
                                             int axis);

struct LevelSets {
  // r -> U_r = entries with 2^{-r-1} sup < |b| <= 2^{-r} sup.
  std::map<int, WeightedIndexSet> bands;
  // |b| <= 2^{-r_max-1} sup (reported, not partitioned further).
  WeightedIndexSet residual;
  double sup = 0.0;
};

// Dyadic magnitude bands for 0 <= r <= r_max. All-zero input yields an
// empty map. Strict lower bounds ensure the bands are disjoint.
LevelSets level_sets(const WeightedIndexSet& b, int r_max = 60);

struct SliceSplit {
  // s[0], s[1], s[2]: extracted where the fiber over k3, then k1, then
  // k2 exceeds the threshold (cumulative removal); s[3]: residual.
  std::array<WeightedIndexSet, 4> s;
  double threshold = 0.0;
};

// Sequential fiber extraction with strict > at the threshold: first the
// k3 fibers of S, then the k1 fibers of the remainder, then the k2
// fibers of what is left.
SliceSplit slice_split(const WeightedIndexSet& s, double threshold);

// Node certificates, each verifiable from the node's own set:
//   level_band:  every |b| in (2^{-r-1} sup, 2^{-r} sup]
//   slice:       every distinguished-axis fiber > threshold
//   residual:    every fiber (all three axes) <= threshold
//   size_leaf:   |set| <= target
//   diagonal:    all three coordinate projections injective
struct Certificate {
  enum class Kind { root, level_band, slice, residual, size_leaf, diagonal };
  Kind kind = Kind::root;
  int axis = -1;          // slice: distinguished slot (0, 1, 2)
  int r = -1;             // level_band
  double sup = 0.0;       // level_band: global sup at split time
  double threshold = 0.0; // slice / residual
  double target = 0.0;    // size_leaf
  double fiber_bound = 0.0; // diagonal
};

bool certificate_holds(const Certificate& cert, const WeightedIndexSet& s);
std::string certificate_kind_name(Certificate::Kind k);

struct PartitionNode {
  std::string op;         // "root", "level-set", "slice-split", "halve",
                          // "diagonal"
  WeightedIndexSet set;
  Certificate cert;
  std::vector<int> children;  // indices into PartitionTree::nodes
};

struct PartitionTree {
  std::vector<PartitionNode> nodes;  // nodes[0] is the root
  const PartitionNode& root() const { return nodes.front(); }
  std::vector<int> leaves() const;
};

// Alternates balanced lexicographic bisection with slice_split at
// |current|^{8/9} (slice parts become certified leaves) until every
// surviving piece has size <= target. Appends nodes under `parent` in
// `tree` and returns the leaf node indices.
std::vector<int> halve_to_target(PartitionTree& tree, int parent,
                                 double target);

// Greedy three-pass rank coloring into at most fiber_bound^3 classes,
// each with all coordinate projections injective. Refuses if some fiber
// exceeds fiber_bound.
std::vector<WeightedIndexSet> diagonal_decompose(const WeightedIndexSet& s,
                                                 double fiber_bound);

// The full cascade: level sets; per U_r a slice_split at |U_r|^{8/9};
// the residual through halve_to_target(|U_r|^{1/8}); each size leaf
// sliced once more at |piece|^{8/9}; final residuals through
// diagonal_decompose with fiber bound |U_r|^{1/9}.
PartitionTree full_partition(const WeightedIndexSet& b, double q);

// Re-checks disjoint-cover at every internal node and every certificate;
// returns a human-readable failure description or empty on success.
std::string verify_tree(const PartitionTree& tree);

}  // namespace trimul
