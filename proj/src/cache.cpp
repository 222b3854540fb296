#include "plpsim/cache.hpp"

#include <algorithm>

namespace plp {

void CacheConfig::validate(const std::string& name) const {
  if (associativity == 0 || block_bytes == 0) throw InputError(name + ": ways and block size must be >= 1");
  const std::uint64_t way_bytes = std::uint64_t{associativity} * block_bytes;
  if (capacity_bytes == 0 || capacity_bytes % way_bytes != 0) {
    throw InputError(name + ": capacity " + std::to_string(capacity_bytes) +
                     " is not divisible by associativity x block size");
  }
}

SetAssocCache::SetAssocCache(CacheConfig config, std::string name)
    : config_(config), name_(std::move(name)) {
  config_.validate(name_);
  sets_.resize(config_.sets());
  for (auto& s : sets_) s.reserve(config_.associativity);
}

AccessResult SetAssocCache::access(std::uint64_t key, Intent intent) {
  ++stats_.accesses;
  const bool mark_dirty = intent == Intent::write && !config_.write_through;
  AccessResult result;
  if (config_.ideal) {
    ++stats_.hits;
    result.hit = true;
    result.latency = config_.hit_latency;
    return result;
  }
  auto& set = set_for(key);
  auto it = std::find_if(set.begin(), set.end(), [&](const Line& l) { return l.key == key; });
  if (it != set.end()) {
    Line line = *it;
    line.dirty = line.dirty || mark_dirty;
    set.erase(it);
    set.insert(set.begin(), line);
    ++stats_.hits;
    result.hit = true;
    result.latency = config_.hit_latency;
    return result;
  }
  ++stats_.misses;
  result.latency = config_.fill_latency;
  if (set.size() == config_.associativity) {
    const Line victim = set.back();
    set.pop_back();
    ++stats_.evictions;
    if (victim.dirty) {
      ++stats_.writebacks;
      result.writeback = victim.key;
    }
  }
  set.insert(set.begin(), Line{key, mark_dirty});
  return result;
}

void SetAssocCache::preload(std::uint64_t key) {
  if (config_.ideal) return;
  auto& set = set_for(key);
  auto it = std::find_if(set.begin(), set.end(), [&](const Line& l) { return l.key == key; });
  if (it != set.end()) {
    Line line = *it;
    set.erase(it);
    set.insert(set.begin(), line);
    return;
  }
  if (set.size() == config_.associativity) set.pop_back();
  set.insert(set.begin(), Line{key, false});
}

bool SetAssocCache::contains(std::uint64_t key) const {
  if (config_.ideal) return true;
  const auto& set = set_for(key);
  return std::any_of(set.begin(), set.end(), [&](const Line& l) { return l.key == key; });
}

bool SetAssocCache::is_dirty(std::uint64_t key) const {
  const auto& set = set_for(key);
  auto it = std::find_if(set.begin(), set.end(), [&](const Line& l) { return l.key == key; });
  return it != set.end() && it->dirty;
}

std::uint64_t SetAssocCache::dirty_lines() const {
  std::uint64_t n = 0;
  for (const auto& s : sets_) n += std::count_if(s.begin(), s.end(), [](const Line& l) { return l.dirty; });
  return n;
}

void SetAssocCache::flush_volatile() {
  for (auto& s : sets_) s.clear();
}

}  // namespace plp
