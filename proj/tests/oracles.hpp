// Brute-force reference implementations for tests. They take raw geometry
// parameters and walk the tree by (level, offset) arithmetic instead of the
// label formulas used by the simulator.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "plpsim/crypto.hpp"
#include "plpsim/model.hpp"

namespace oracle {

/// Root over every leaf, computed bottom-up with no default-subtree shortcuts.
plp::Tag full_root(const std::map<std::uint64_t, plp::SplitCounter>& counters, unsigned arity, unsigned levels,
                   const plp::KeySet& keys);

/// Deepest common element of the two leaves' full ancestor lists.
std::uint64_t lca_bruteforce(std::uint64_t leaf_a, std::uint64_t leaf_b, unsigned arity, unsigned levels);

/// Node updates of one epoch under paired coalescing, persists given as
/// page numbers in submission order: every persist but the last stops
/// strictly below its LCA with the next one.
std::size_t dedup_update_count(const std::vector<std::uint64_t>& pages, unsigned arity, unsigned levels);

/// Plaintext state after replaying the first `count` stores of a log.
std::map<plp::BlockAddr, plp::Block> replay_prefix(const std::vector<std::pair<plp::BlockAddr, plp::Block>>& log,
                                                   std::size_t count);

}  // namespace oracle
