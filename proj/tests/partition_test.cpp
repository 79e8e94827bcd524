// partition_test.cpp

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "trimul/partition.hpp"

using namespace trimul;

namespace {

TripleKey key3(int a, int b, int c) {
  Eigen::VectorXi v(1);
  TripleKey k;
  v[0] = a;
  k[0] = pack_coord(v);
  v[0] = b;
  k[1] = pack_coord(v);
  v[0] = c;
  k[2] = pack_coord(v);
  return k;
}

WeightedIndexSet random_set(int count, std::uint64_t seed, int coord_span,
                            double decades) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(-coord_span, coord_span);
  std::uniform_real_distribution<double> mag(0.0, decades);
  std::set<TripleKey> used;
  std::vector<std::pair<TripleKey, double>> entries;
  while (entries.size() < static_cast<std::size_t>(count)) {
    const TripleKey k = key3(coord(rng), coord(rng), coord(rng));
    if (!used.insert(k).second) continue;
    entries.emplace_back(k, std::exp2(-mag(rng)));
  }
  return make_weighted_set(1, std::move(entries));
}

// every axis coordinate appears at most once inside the class
bool coordinate_injective(const WeightedIndexSet& s) {
  for (int axis = 0; axis < 3; ++axis) {
    std::set<long long> seen;
    for (const auto& e : s.entries)
      if (!seen.insert(e.first[axis]).second) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("coordinate packing round trips and rejects overflow") {
  Eigen::VectorXi v(1);
  for (int x : {-1048575, -37, 0, 1, 515, 1048575}) {
    v[0] = x;
    CHECK(unpack_coord(pack_coord(v), 1)[0] == x);
  }
  v[0] = 1 << 20;
  CHECK_THROWS_AS(pack_coord(v), std::invalid_argument);
  v[0] = -(1 << 20);
  CHECK_THROWS_AS(pack_coord(v), std::invalid_argument);
  // packing is strictly monotone-free of collisions on a brute sample
  std::set<long long> seen;
  Eigen::VectorXi w(1);
  for (int x = -40; x <= 40; x += 7)
    for (int y = -40; y <= 40; y += 11) {
      Eigen::VectorXi u(2);
      u << x, y;
      CHECK(seen.insert(pack_coord(u)).second);
    }
}

TEST_CASE("level sets use strict dyadic half open bands") {
  const double B = 0.8;
  std::vector<std::pair<TripleKey, double>> entries = {
      {key3(0, 0, 0), B},            // r = 0, upper endpoint included
      {key3(1, 0, 0), B / 2},        // r = 1, the half point drops a band
      {key3(2, 0, 0), B / 2 + 1e-9}, // still r = 0
      {key3(3, 0, 0), B / 4},        // r = 2
      {key3(4, 0, 0), B * std::exp2(-61)},  // beyond r_max, residual
  };
  WeightedIndexSet s = make_weighted_set(1, std::move(entries));
  LevelSets ls = level_sets(s, 60);
  CHECK(ls.sup == B);
  REQUIRE(ls.bands.count(0) == 1);
  REQUIRE(ls.bands.count(1) == 1);
  REQUIRE(ls.bands.count(2) == 1);
  CHECK(ls.bands.at(0).size() == 2);
  CHECK(ls.bands.at(0).contains(key3(0, 0, 0)));
  CHECK(ls.bands.at(0).contains(key3(2, 0, 0)));
  CHECK(ls.bands.at(1).size() == 1);
  CHECK(ls.bands.at(1).contains(key3(1, 0, 0)));
  CHECK(ls.bands.at(2).size() == 1);
  CHECK(ls.residual.size() == 1);
  CHECK(ls.residual.contains(key3(4, 0, 0)));
}

TEST_CASE("fiber sizes match a brute count") {
  WeightedIndexSet s = random_set(300, 9, 6, 4.0);
  for (int axis = 0; axis < 3; ++axis) {
    const auto sizes = fiber_sizes(s, axis);
    std::map<long long, std::size_t> brute;
    for (const auto& e : s.entries) ++brute[e.first[axis]];
    REQUIRE(sizes.size() == brute.size());
    for (const auto& [coord, n] : brute) CHECK(sizes.at(coord) == n);
  }
}

TEST_CASE("slice split extracts heavy fibers in the fixed axis order") {
  // a plane of 30 entries at x3 = 5 dominates every other fiber
  std::vector<std::pair<TripleKey, double>> entries;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 5; ++b) entries.emplace_back(key3(a, b, 5), 1.0);
  for (int t = 0; t < 6; ++t) entries.emplace_back(key3(t, t + 1, t + 10), 1.0);
  WeightedIndexSet s = make_weighted_set(1, std::move(entries));
  SliceSplit sp = slice_split(s, 8.0);
  // axis order {2, 0, 1}: the x3-plane lands in the first part
  CHECK(sp.threshold == 8.0);
  CHECK(sp.s[0].size() == 30);
  for (const auto& e : sp.s[0].entries) CHECK(unpack_coord(e.first[2], 1)[0] == 5);
  // the residual has every fiber at or below the threshold
  for (int axis = 0; axis < 3; ++axis)
    for (const auto& [coord, n] : fiber_sizes(sp.s[3], axis))
      CHECK(n <= 8);
  // the four parts cover the set exactly
  std::size_t total = 0;
  for (const auto& part : sp.s) total += part.size();
  CHECK(total == s.size());
}

TEST_CASE("halve to target yields parts no larger than the target") {
  WeightedIndexSet s = random_set(1000, 21, 12, 3.0);
  PartitionTree tree;
  Certificate root_cert;
  root_cert.kind = Certificate::Kind::root;
  root_cert.sup = s.sup_abs();
  PartitionNode root;
  root.op = "root";
  root.set = s;
  root.cert = root_cert;
  tree.nodes.push_back(std::move(root));
  const auto leaves = halve_to_target(tree, 0, 64);
  std::size_t total = 0;
  for (int leaf : leaves) {
    CHECK(tree.nodes[leaf].set.size() <= 64);
    total += tree.nodes[leaf].set.size();
  }
  CHECK(total == s.size());
  CHECK(verify_tree(tree).empty());
}

TEST_CASE("diagonal decomposition emits coordinate injective classes") {
  WeightedIndexSet s = random_set(400, 33, 40, 2.0);
  // fibers in a random sprinkle this sparse stay small
  std::size_t fiber_max = 0;
  for (int axis = 0; axis < 3; ++axis)
    for (const auto& [coord, n] : fiber_sizes(s, axis))
      fiber_max = std::max(fiber_max, n);
  const std::size_t bound = fiber_max;
  const auto classes = diagonal_decompose(s, bound);
  CHECK(classes.size() <= bound * bound * bound);
  std::size_t total = 0;
  for (const auto& cls : classes) {
    CHECK(coordinate_injective(cls));
    total += cls.size();
  }
  CHECK(total == s.size());
}

TEST_CASE("diagonal decomposition refuses an oversized fiber") {
  std::vector<std::pair<TripleKey, double>> entries;
  for (int t = 0; t < 9; ++t) entries.emplace_back(key3(0, t, t + 1), 1.0);
  WeightedIndexSet s = make_weighted_set(1, std::move(entries));
  CHECK_THROWS_AS(diagonal_decompose(s, 2), refusal_error);
}

TEST_CASE("a singleton set partitions into a single leaf chain") {
  std::vector<std::pair<TripleKey, double>> entries = {{key3(1, 2, 3), 0.4}};
  WeightedIndexSet s = make_weighted_set(1, std::move(entries));
  PartitionTree tree = full_partition(s, 2.0);
  CHECK(verify_tree(tree).empty());
  const auto leaves = tree.leaves();
  std::size_t covered = 0;
  for (int leaf : leaves) covered += tree.nodes[leaf].set.size();
  CHECK(covered == 1);
}

TEST_CASE("full partition verifies on random sets of many sizes") {
  std::mt19937_64 seeds(404);
  for (int size : {2, 10, 100, 1000, 10000}) {
    WeightedIndexSet s = random_set(size, seeds(), 20, 12.0);
    PartitionTree tree = full_partition(s, 2.0);
    const std::string verdict = verify_tree(tree);
    CHECK_MESSAGE(verdict.empty(), verdict << " at size " << size);
    // leaves jointly cover the root exactly
    std::size_t covered = 0;
    for (int leaf : tree.leaves()) covered += tree.nodes[leaf].set.size();
    CHECK(covered == s.size());
    // diagonal leaves are coordinate injective
    for (int leaf : tree.leaves())
      if (tree.nodes[leaf].cert.kind == Certificate::Kind::diagonal)
        CHECK(coordinate_injective(tree.nodes[leaf].set));
  }
}

TEST_CASE("full partition is deterministic") {
  WeightedIndexSet s = random_set(500, 77, 15, 6.0);
  PartitionTree t1 = full_partition(s, 2.0);
  PartitionTree t2 = full_partition(s, 2.0);
  REQUIRE(t1.nodes.size() == t2.nodes.size());
  for (std::size_t i = 0; i < t1.nodes.size(); ++i) {
    CHECK(t1.nodes[i].op == t2.nodes[i].op);
    CHECK(t1.nodes[i].children == t2.nodes[i].children);
    REQUIRE(t1.nodes[i].set.size() == t2.nodes[i].set.size());
    for (std::size_t e = 0; e < t1.nodes[i].set.entries.size(); ++e) {
      CHECK(t1.nodes[i].set.entries[e].first ==
            t2.nodes[i].set.entries[e].first);
      CHECK(t1.nodes[i].set.entries[e].second ==
            t2.nodes[i].set.entries[e].second);
    }
  }
}

TEST_CASE("verify tree flags tampered contents") {
  WeightedIndexSet s = random_set(200, 55, 10, 4.0);
  PartitionTree tree = full_partition(s, 2.0);
  REQUIRE(verify_tree(tree).empty());

  PartitionTree broken = tree;
  // find a leaf with an entry and perturb its weight
  for (int leaf : broken.leaves()) {
    if (broken.nodes[leaf].set.empty()) continue;
    broken.nodes[leaf].set.entries.front().second *= 3.0;
    break;
  }
  CHECK_FALSE(verify_tree(broken).empty());

  PartitionTree dropped = tree;
  for (int leaf : dropped.leaves()) {
    if (dropped.nodes[leaf].set.empty()) continue;
    dropped.nodes[leaf].set.entries.pop_back();
    break;
  }
  CHECK_FALSE(verify_tree(dropped).empty());
}

TEST_CASE("certificates re-verify against their kinds") {
  Certificate c;
  c.kind = Certificate::Kind::size_leaf;
  c.target = 10;
  std::vector<std::pair<TripleKey, double>> entries;
  for (int t = 0; t < 8; ++t) entries.emplace_back(key3(t, 0, 0), 1.0);
  WeightedIndexSet s = make_weighted_set(1, std::move(entries));
  CHECK(certificate_holds(c, s));
  c.target = 4;
  CHECK_FALSE(certificate_holds(c, s));

  Certificate band;
  band.kind = Certificate::Kind::level_band;
  band.r = 1;
  band.sup = 1.0;
  std::vector<std::pair<TripleKey, double>> be = {{key3(0, 0, 0), 0.4}};
  WeightedIndexSet bs = make_weighted_set(1, std::move(be));
  CHECK(certificate_holds(band, bs));  // 0.4 in (0.25, 0.5]
  band.r = 0;
  CHECK_FALSE(certificate_holds(band, bs));
}
