// Counter-mode encryption, stateful MACs and tree-node hashing.
//
// All three are built on a keyed 64-bit PRF (SipHash-2-4). Inputs are
// domain-separated so a pad word can never collide with a MAC or a node hash.
#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "plpsim/model.hpp"

namespace plp {

struct KeySet {
  std::array<std::uint8_t, 16> enc{};
  std::array<std::uint8_t, 16> mac{};

  /// Deterministic keys for a simulation run.
  static KeySet from_seed(std::uint64_t seed);
};

Block encrypt(const Block& plaintext, BlockAddr addr, EffectiveCounter ctr, const KeySet& keys);
Block decrypt(const Block& ciphertext, BlockAddr addr, EffectiveCounter ctr, const KeySet& keys);

Tag mac(const Block& ciphertext, BlockAddr addr, EffectiveCounter ctr, const KeySet& keys);
bool verify_mac(const Block& ciphertext, BlockAddr addr, EffectiveCounter ctr, Tag tag,
                const KeySet& keys);

/// Keyed digest of a tree node payload. `payload` must be exactly
/// `expected_bytes` long (arity * 8 for interior nodes, 64 for a counter block).
Tag hash_node(std::span<const std::uint8_t> payload, std::size_t expected_bytes,
              const KeySet& keys);

/// Interior node value over its children's tags (little-endian concatenation).
Tag hash_children(std::span<const Tag> children, std::size_t arity, const KeySet& keys);

/// Leaf value: digest of a serialized counter block.
Tag hash_counter_block(const SplitCounter& counter, const KeySet& keys);

}  // namespace plp
