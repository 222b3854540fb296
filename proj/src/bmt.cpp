#include "plpsim/bmt.hpp"

#include <algorithm>
#include <limits>

namespace plp {

BmtGeometry::BmtGeometry(unsigned arity, unsigned levels) : arity_(arity), levels_(levels) {
  if (arity < 2) throw InputError("tree arity must be >= 2");
  if (levels < 2) throw InputError("tree levels must be >= 2");
  std::uint64_t count = 1;
  Label first = 0;
  for (unsigned l = 1; l < levels; ++l) {
    first += count;
    if (count > std::numeric_limits<std::uint64_t>::max() / arity / 2) {
      throw InputError("tree geometry overflows the label space");
    }
    count *= arity;
  }
  leaf_count_ = count;
  first_leaf_ = first;
}

unsigned BmtGeometry::level_of(Label n) const {
  unsigned level = 1;
  while (n != 0) {
    n = parent(n);
    ++level;
  }
  return level;
}

Label BmtGeometry::leaf_for_page(std::uint64_t page) const {
  if (page >= leaf_count_) {
    throw InputError("page " + std::to_string(page) + " outside the protected region of " +
                     std::to_string(leaf_count_) + " pages");
  }
  return first_leaf_ + page;
}

std::vector<Label> BmtGeometry::update_path(Label leaf) const {
  if (!is_leaf(leaf)) throw InputError("label " + std::to_string(leaf) + " is not a leaf");
  std::vector<Label> path;
  path.reserve(levels_);
  path.push_back(leaf);
  while (leaf != 0) {
    leaf = parent(leaf);
    path.push_back(leaf);
  }
  return path;
}

Label BmtGeometry::lca(Label a, Label b) const {
  // Leaves share a level, so equal path positions are equal levels.
  const auto pa = update_path(a);
  const auto pb = update_path(b);
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i] == pb[i]) return pa[i];
  }
  return 0;
}

BmtState::BmtState(BmtGeometry geometry, KeySet keys)
    : geometry_(geometry), keys_(keys), defaults_(geometry.levels() + 1, 0) {
  const unsigned levels = geometry_.levels();
  defaults_[levels] = hash_counter_block(SplitCounter{}, keys_);
  std::vector<Tag> kids(geometry_.arity());
  for (unsigned l = levels - 1; l >= 1; --l) {
    std::fill(kids.begin(), kids.end(), defaults_[l + 1]);
    defaults_[l] = hash_children(kids, geometry_.arity(), keys_);
  }
  root_register_ = defaults_[1];
}

Tag BmtState::value(Label n) const {
  if (auto it = values_.find(n); it != values_.end()) return it->second;
  return defaults_[geometry_.level_of(n)];
}

void BmtState::set(Label n, Tag v) { values_[n] = v; }

Tag BmtState::compute_interior(Label n) const {
  if (geometry_.is_leaf(n) || !geometry_.is_valid(n)) {
    throw InputError("label " + std::to_string(n) + " is not an interior node");
  }
  const unsigned arity = geometry_.arity();
  std::vector<Tag> kids(arity);
  const Label first = geometry_.first_child(n);
  for (unsigned i = 0; i < arity; ++i) kids[i] = value(first + i);
  return hash_children(kids, arity, keys_);
}

Tag BmtState::apply_node_update(Label n) {
  const Tag v = compute_interior(n);
  set(n, v);
  return v;
}

Tag BmtState::apply_leaf_update(Label leaf, const SplitCounter& counter) {
  if (!geometry_.is_leaf(leaf)) throw InputError("label " + std::to_string(leaf) + " is not a leaf");
  const Tag v = compute_leaf(counter);
  set(leaf, v);
  return v;
}

Tag BmtState::update_from_counter(std::uint64_t page, const SplitCounter& counter) {
  Label n = geometry_.leaf_for_page(page);
  Tag v = apply_leaf_update(n, counter);
  while (n != 0) {
    n = geometry_.parent(n);
    v = apply_node_update(n);
  }
  root_register_ = v;
  return v;
}

std::optional<IntegrityFailure> BmtState::verify_path(Label leaf,
                                                      const SplitCounter& counter) const {
  const auto path = geometry_.update_path(leaf);
  if (compute_leaf(counter) != value(leaf)) {
    return IntegrityFailure{geometry_.levels(), leaf};
  }
  for (std::size_t i = 1; i < path.size(); ++i) {
    const Label n = path[i];
    if (compute_interior(n) != value(n)) {
      return IntegrityFailure{geometry_.levels() - static_cast<unsigned>(i), n};
    }
  }
  if (value(0) != root_register_) return IntegrityFailure{1, 0};
  return std::nullopt;
}

Tag BmtState::rebuild_root(const BmtGeometry& geometry, const KeySet& keys,
                           const std::map<std::uint64_t, SplitCounter>& counters) {
  BmtState scratch(geometry, keys);
  std::map<Label, Tag> frontier;
  for (const auto& [page, counter] : counters) {
    const Label leaf = geometry.leaf_for_page(page);
    frontier[leaf] = scratch.apply_leaf_update(leaf, counter);
  }
  for (unsigned level = geometry.levels(); level > 1; --level) {
    std::map<Label, Tag> next;
    for (const auto& entry : frontier) {
      const Label p = geometry.parent(entry.first);
      if (!next.contains(p)) next[p] = scratch.apply_node_update(p);
    }
    frontier = std::move(next);
  }
  return scratch.value(0);
}

}  // namespace plp
