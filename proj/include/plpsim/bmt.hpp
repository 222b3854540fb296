// Bonsai Merkle Tree over counter blocks.
//
// Nodes carry integer labels: the root is 0 and the children of n are
// arity*n+1 .. arity*n+arity. Level 1 is the root, level `levels` holds the
// leaves, one leaf per encryption page. Leaves hold the digest of their
// counter block; interior nodes hold the digest of their children.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "plpsim/crypto.hpp"
#include "plpsim/model.hpp"

namespace plp {

using Label = std::uint64_t;

class BmtGeometry {
 public:
  BmtGeometry() : BmtGeometry(8, 9) {}
  /// Throws InputError for arity < 2, levels < 2, or label-space overflow.
  BmtGeometry(unsigned arity, unsigned levels);

  unsigned arity() const { return arity_; }
  unsigned levels() const { return levels_; }

  std::uint64_t leaf_count() const { return leaf_count_; }
  Label first_leaf() const { return first_leaf_; }
  std::uint64_t node_count() const { return first_leaf_ + leaf_count_; }

  bool is_valid(Label n) const { return n < node_count(); }
  bool is_leaf(Label n) const { return n >= first_leaf_ && n < node_count(); }
  unsigned level_of(Label n) const;
  Label parent(Label n) const { return (n - 1) / arity_; }
  Label first_child(Label n) const { return arity_ * n + 1; }

  /// Throws InputError when the page lies outside the protected region.
  Label leaf_for_page(std::uint64_t page) const;
  std::uint64_t page_of_leaf(Label leaf) const { return leaf - first_leaf_; }

  /// Labels from `leaf` up to and including the root. Throws for non-leaves.
  std::vector<Label> update_path(Label leaf) const;

  /// Deepest node shared by both leaves' update paths.
  Label lca(Label a, Label b) const;

  friend bool operator==(const BmtGeometry&, const BmtGeometry&) = default;

 private:
  unsigned arity_;
  unsigned levels_;
  std::uint64_t leaf_count_;
  Label first_leaf_;
};

/// Verification failure: first level (counted from the root, leaf = levels)
/// where a stored value disagrees with its recomputation.
struct IntegrityFailure {
  unsigned level = 0;
  Label node = 0;
};

/// Node values of one tree instance. Untouched subtrees take per-level
/// default values (the digest of an all-zero counter block, propagated up),
/// so only modified nodes are stored.
class BmtState {
 public:
  BmtState(BmtGeometry geometry, KeySet keys);

  const BmtGeometry& geometry() const { return geometry_; }
  const KeySet& keys() const { return keys_; }

  Tag value(Label n) const;
  void set(Label n, Tag v);

  /// Digest of `n`'s current children. `n` must be interior.
  Tag compute_interior(Label n) const;
  Tag compute_leaf(const SplitCounter& counter) const { return hash_counter_block(counter, keys_); }

  /// Recompute and store an interior node; returns the new value.
  Tag apply_node_update(Label n);
  /// Recompute and store a leaf from its counter block; returns the new value.
  Tag apply_leaf_update(Label leaf, const SplitCounter& counter);

  /// Leaf update followed by every ancestor, refreshing the root register.
  Tag update_from_counter(std::uint64_t page, const SplitCounter& counter);

  Tag root_register() const { return root_register_; }
  void set_root_register(Tag v) { root_register_ = v; }

  /// Checks `counter` against the stored leaf, each stored ancestor against
  /// its recomputation, and the stored root against the root register.
  std::optional<IntegrityFailure> verify_path(Label leaf, const SplitCounter& counter) const;

  /// Discards interior state (crash); the root register survives.
  void drop_volatile() { values_.clear(); }

  /// Root over the given durable counter blocks; every other page is zero.
  static Tag rebuild_root(const BmtGeometry& geometry, const KeySet& keys,
                          const std::map<std::uint64_t, SplitCounter>& counters);

  Tag default_value(unsigned level) const { return defaults_[level]; }

 private:
  BmtGeometry geometry_;
  KeySet keys_;
  std::vector<Tag> defaults_;  // indexed by level, [0] unused
  std::unordered_map<Label, Tag> values_;
  Tag root_register_ = 0;
};

}  // namespace plp
