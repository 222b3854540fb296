// Set-associative LRU metadata caches (counter, MAC, BMT node).
//
// Caches model timing and statistics only; metadata values live in the
// engine's functional state.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plpsim/model.hpp"

namespace plp {

struct CacheConfig {
  std::uint64_t capacity_bytes = 131072;
  unsigned associativity = 8;
  unsigned block_bytes = 64;
  Cycle hit_latency = 2;
  Cycle fill_latency = 200;
  /// Every access hits. Used for golden timing runs.
  bool ideal = false;
  /// Writes never leave dirty lines behind.
  bool write_through = false;

  /// Throws InputError when capacity is not a multiple of ways * block size.
  void validate(const std::string& name) const;
  std::uint64_t sets() const { return capacity_bytes / (std::uint64_t{associativity} * block_bytes); }
};

enum class Intent { read, write };

struct AccessResult {
  bool hit = false;
  Cycle latency = 0;
  /// Dirty victim evicted by this access, if any.
  std::optional<std::uint64_t> writeback;
};

struct CacheStats {
  std::uint64_t accesses = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  std::uint64_t writebacks = 0;

  double hit_ratio() const { return accesses == 0 ? 0.0 : double(hits) / double(accesses); }
};

class SetAssocCache {
 public:
  explicit SetAssocCache(CacheConfig config, std::string name = "cache");

  /// Looks up `key`. A miss allocates the line immediately (the caller charges
  /// `latency`), evicting the LRU way of the set.
  AccessResult access(std::uint64_t key, Intent intent);

  /// Installs `key` as most recently used without counting an access.
  void preload(std::uint64_t key);

  bool contains(std::uint64_t key) const;
  bool is_dirty(std::uint64_t key) const;
  std::uint64_t dirty_lines() const;

  /// Power loss: every line is gone.
  void flush_volatile();

  const CacheConfig& config() const { return config_; }
  const CacheStats& stats() const { return stats_; }
  const std::string& name() const { return name_; }

 private:
  struct Line {
    std::uint64_t key;
    bool dirty;
  };
  // Each set is ordered most- to least-recently used.
  std::vector<std::vector<Line>> sets_;
  CacheConfig config_;
  CacheStats stats_;
  std::string name_;

  std::vector<Line>& set_for(std::uint64_t key) { return sets_[key % sets_.size()]; }
  const std::vector<Line>& set_for(std::uint64_t key) const { return sets_[key % sets_.size()]; }
};

/// The three discrete metadata caches of the secure memory controller.
struct MetadataCaches {
  SetAssocCache counter;
  SetAssocCache mac;
  SetAssocCache bmt;

  MetadataCaches(const CacheConfig& counter_cfg, const CacheConfig& mac_cfg,
                 const CacheConfig& bmt_cfg)
      : counter(counter_cfg, "counter"), mac(mac_cfg, "mac"), bmt(bmt_cfg, "bmt") {}

  void flush_volatile() {
    counter.flush_volatile();
    mac.flush_volatile();
    bmt.flush_volatile();
  }
};

}  // namespace plp
