#include "oracles.hpp"

#include <stdexcept>

namespace oracle {
namespace {

std::uint64_t ipow(std::uint64_t b, unsigned e) {
  std::uint64_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

struct Pos {
  unsigned depth;  // 0 = root
  std::uint64_t offset;
  bool operator==(const Pos&) const = default;
};

// Label of the first node at each depth: sum of arity^d for shallower depths.
std::uint64_t depth_start(unsigned depth, unsigned arity) {
  std::uint64_t s = 0;
  for (unsigned d = 0; d < depth; ++d) s += ipow(arity, d);
  return s;
}

Pos position(std::uint64_t label, unsigned arity, unsigned levels) {
  for (unsigned d = 0; d < levels; ++d) {
    const std::uint64_t start = depth_start(d, arity);
    const std::uint64_t width = ipow(arity, d);
    if (label < start + width) return {d, label - start};
  }
  throw std::out_of_range("label outside tree");
}

std::vector<Pos> ancestors_from_root(Pos p, unsigned arity) {
  std::vector<Pos> out(p.depth + 1);
  for (unsigned d = 0; d <= p.depth; ++d) {
    out[d] = {d, p.offset / ipow(arity, p.depth - d)};
  }
  return out;
}

}  // namespace

plp::Tag full_root(const std::map<std::uint64_t, plp::SplitCounter>& counters, unsigned arity, unsigned levels,
                   const plp::KeySet& keys) {
  const std::uint64_t leaves = ipow(arity, levels - 1);
  std::vector<plp::Tag> layer(leaves);
  for (std::uint64_t i = 0; i < leaves; ++i) {
    auto it = counters.find(i);
    layer[i] = plp::hash_counter_block(it == counters.end() ? plp::SplitCounter{} : it->second, keys);
  }
  while (layer.size() > 1) {
    std::vector<plp::Tag> up(layer.size() / arity);
    for (std::size_t j = 0; j < up.size(); ++j) {
      up[j] = plp::hash_children(std::span<const plp::Tag>(layer.data() + j * arity, arity), arity, keys);
    }
    layer = std::move(up);
  }
  return layer[0];
}

std::uint64_t lca_bruteforce(std::uint64_t leaf_a, std::uint64_t leaf_b, unsigned arity, unsigned levels) {
  const auto a = ancestors_from_root(position(leaf_a, arity, levels), arity);
  const auto b = ancestors_from_root(position(leaf_b, arity, levels), arity);
  Pos deepest = a[0];
  for (std::size_t d = 0; d < a.size() && d < b.size() && a[d] == b[d]; ++d) deepest = a[d];
  return depth_start(deepest.depth, arity) + deepest.offset;
}

std::size_t dedup_update_count(const std::vector<std::uint64_t>& pages, unsigned arity, unsigned levels) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (i + 1 == pages.size()) {
      total += levels;
      break;
    }
    const auto a = ancestors_from_root({levels - 1, pages[i]}, arity);
    const auto b = ancestors_from_root({levels - 1, pages[i + 1]}, arity);
    unsigned shared = 0;
    while (shared < a.size() && a[shared] == b[shared]) ++shared;
    // Depths shared..levels-1 lie strictly below the LCA.
    total += levels - shared;
  }
  return total;
}

std::map<plp::BlockAddr, plp::Block> replay_prefix(const std::vector<std::pair<plp::BlockAddr, plp::Block>>& log,
                                                   std::size_t count) {
  std::map<plp::BlockAddr, plp::Block> out;
  for (std::size_t i = 0; i < count && i < log.size(); ++i) out[log[i].first] = log[i].second;
  return out;
}

}  // namespace oracle
