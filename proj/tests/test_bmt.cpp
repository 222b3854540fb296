#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "plpsim/bmt.hpp"

using namespace plp;

TEST_CASE("geometry of the default tree") {
  const BmtGeometry g;
  CHECK(g.arity() == 8);
  CHECK(g.levels() == 9);
  CHECK(g.leaf_count() == 16777216);
  CHECK(g.first_leaf() == 2396745);
  CHECK(g.level_of(0) == 1);
  CHECK(g.level_of(1) == 2);
  CHECK(g.level_of(8) == 2);
  CHECK(g.level_of(9) == 3);
  CHECK(g.level_of(g.first_leaf()) == 9);
  CHECK(g.parent(9) == 1);
  CHECK(g.first_child(1) == 9);
  CHECK(g.leaf_for_page(0) == g.first_leaf());
  CHECK_THROWS_AS(g.leaf_for_page(g.leaf_count()), InputError);
}

TEST_CASE("invalid geometries are rejected") {
  CHECK_THROWS_AS(BmtGeometry(1, 4), InputError);
  CHECK_THROWS_AS(BmtGeometry(8, 1), InputError);
  CHECK_THROWS_AS(BmtGeometry(8, 40), InputError);
}

TEST_CASE("update path climbs from leaf to root") {
  const BmtGeometry g(8, 4);
  const auto path = g.update_path(g.leaf_for_page(100));
  REQUIRE(path.size() == 4);
  CHECK(path.front() == g.leaf_for_page(100));
  CHECK(path.back() == 0);
  for (std::size_t i = 1; i < path.size(); ++i) CHECK(path[i] == g.parent(path[i - 1]));
  CHECK_THROWS_AS(g.update_path(0), InputError);
}

TEST_CASE("LCA agrees with the ancestor-list oracle on sampled leaf pairs") {
  const BmtGeometry g(8, 4);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100000; ++i) {
    const Label a = g.leaf_for_page(rng() % g.leaf_count());
    const Label b = g.leaf_for_page(rng() % g.leaf_count());
    REQUIRE(g.lca(a, b) == oracle::lca_bruteforce(a, b, 8, 4));
  }
}

TEST_CASE("LCA basics") {
  const BmtGeometry g(2, 4);
  const Label a = g.leaf_for_page(0), b = g.leaf_for_page(1), c = g.leaf_for_page(2);
  CHECK(g.lca(a, a) == a);
  CHECK(g.lca(a, b) == g.lca(b, a));
  CHECK(g.lca(a, b) == 3);
  CHECK(g.lca(a, c) == 1);
  CHECK(g.lca(a, g.leaf_for_page(7)) == 0);
}

TEST_CASE("incremental root matches the dense oracle and the rebuild") {
  for (unsigned arity : {2u, 4u, 8u}) {
    const BmtGeometry g(arity, 4);
    const KeySet keys = KeySet::from_seed(arity);
    BmtState s(g, keys);
    std::map<std::uint64_t, SplitCounter> counters;
    CHECK(s.root_register() == oracle::full_root(counters, arity, 4, keys));
    std::mt19937_64 rng(arity);
    for (int i = 0; i < 200; ++i) {
      const std::uint64_t page = rng() % g.leaf_count();
      counters[page].bump(rng() % kBlocksPerPage);
      s.update_from_counter(page, counters[page]);
      REQUIRE(s.root_register() == oracle::full_root(counters, arity, 4, keys));
    }
    CHECK(BmtState::rebuild_root(g, keys, counters) == s.root_register());
  }
}

TEST_CASE("a single tampered counter changes the root") {
  const BmtGeometry g(8, 4);
  const KeySet keys = KeySet::from_seed(1);
  std::map<std::uint64_t, SplitCounter> counters;
  counters[5].bump(1);
  const Tag root = oracle::full_root(counters, 8, 4, keys);
  for (std::uint64_t page : {0ULL, 5ULL, 511ULL}) {
    auto tampered = counters;
    tampered[page].bump(0);
    CHECK(oracle::full_root(tampered, 8, 4, keys) != root);
    CHECK(BmtState::rebuild_root(g, keys, tampered) != root);
  }
}

TEST_CASE("path verification finds the first bad level") {
  const BmtGeometry g(4, 4);
  const KeySet keys = KeySet::from_seed(1);
  BmtState s(g, keys);
  SplitCounter c;
  c.bump(2);
  s.update_from_counter(7, c);
  const Label leaf = g.leaf_for_page(7);
  CHECK_FALSE(s.verify_path(leaf, c).has_value());

  const auto stale = s.verify_path(leaf, SplitCounter{});
  REQUIRE(stale.has_value());
  CHECK(stale->level == 4);

  BmtState t = s;
  t.set_root_register(t.root_register() ^ 1);
  const auto bad_root = t.verify_path(leaf, c);
  REQUIRE(bad_root.has_value());
  CHECK(bad_root->level == 1);
}

TEST_CASE("a crash drops interior nodes but keeps the root register") {
  const BmtGeometry g(4, 3);
  BmtState s(g, KeySet::from_seed(1));
  SplitCounter c;
  c.bump(0);
  const Tag root = s.update_from_counter(3, c);
  s.drop_volatile();
  CHECK(s.root_register() == root);
  CHECK(s.value(g.leaf_for_page(3)) == s.default_value(g.levels()));
}

TEST_CASE("root of an untouched tree is pinned") {
  const KeySet keys = KeySet::from_seed(1);
  CHECK(BmtState(BmtGeometry(8, 4), keys).root_register() == 0x004e680f8f257c59ULL);
  CHECK(oracle::full_root({}, 8, 4, keys) == 0x004e680f8f257c59ULL);
  CHECK(BmtState(BmtGeometry(), keys).root_register() == 0x0d5f5c612bdeeb2aULL);
}
