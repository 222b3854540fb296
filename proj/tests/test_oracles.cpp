#include <doctest.h>

#include "oracles.hpp"

using namespace plp;

TEST_CASE("ancestor-list LCA on a tiny binary tree") {
  // arity 2, levels 3: leaves are labels 3..6
  CHECK(oracle::lca_bruteforce(3, 4, 2, 3) == 1);
  CHECK(oracle::lca_bruteforce(3, 6, 2, 3) == 0);
  CHECK(oracle::lca_bruteforce(5, 5, 2, 3) == 5);
}

TEST_CASE("dense root of an untouched tree is deterministic and key dependent") {
  const std::map<std::uint64_t, SplitCounter> none;
  const auto a = oracle::full_root(none, 2, 3, KeySet::from_seed(1));
  CHECK(a == oracle::full_root(none, 2, 3, KeySet::from_seed(1)));
  CHECK(a != oracle::full_root(none, 2, 3, KeySet::from_seed(2)));
}

TEST_CASE("paired dedup counts") {
  CHECK(oracle::dedup_update_count({}, 2, 4) == 0);
  CHECK(oracle::dedup_update_count({7}, 2, 4) == 4);
  CHECK(oracle::dedup_update_count({1, 1}, 2, 4) == 0 + 4);
  CHECK(oracle::dedup_update_count({0, 7}, 2, 4) == 3 + 4);
  CHECK(oracle::dedup_update_count({0, 1, 2}, 2, 4) == 7);
}

TEST_CASE("prefix replay keeps the newest value per block") {
  const BlockAddr a = BlockAddr::from(0), b = BlockAddr::from(64);
  Block x{}, y{}, z{};
  x[0] = 1;
  y[0] = 2;
  z[0] = 3;
  const std::vector<std::pair<BlockAddr, Block>> log{{a, x}, {b, y}, {a, z}};
  CHECK(oracle::replay_prefix(log, 0).empty());
  CHECK(oracle::replay_prefix(log, 2).at(a) == x);
  CHECK(oracle::replay_prefix(log, 3).at(a) == z);
  CHECK(oracle::replay_prefix(log, 3).size() == 2);
}
