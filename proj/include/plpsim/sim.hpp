// Whole-run drivers on top of the engine.
#pragma once

#include <optional>
#include <vector>

#include "plpsim/engine.hpp"

namespace plp {

struct CacheSummary {
  CacheStats counter;
  CacheStats mac;
  CacheStats bmt;
};

struct RunResult {
  Scheme scheme = Scheme::sequential;
  std::size_t persists = 0;
  std::size_t epochs = 0;
  /// Cycle of the last persist completion (strict: tuple complete, epoch
  /// schemes: last epoch retired).
  Cycle total_cycles = 0;
  /// Cycle the WPQ finished draining to NVMM.
  Cycle drain_cycles = 0;
  std::optional<Cycle> leaf_start_offset;
  EngineStats stats;
  CacheSummary caches;
  Tag final_root = 0;
  /// Per persist, in persist order: the cycle it became complete.
  std::vector<Cycle> completions;
  std::vector<NodeUpdateRecord> node_log;
  std::vector<DurabilityRecord> durability_log;
  std::vector<EpochRecord> epoch_log;
};

/// Runs the trace to completion. Throws DeadlockError on a stuck pipeline.
RunResult simulate(const SimConfig& config, const std::vector<TraceEvent>& trace);

/// `n` stores to distinct pages, one epoch, no fences.
std::vector<TraceEvent> distinct_page_trace(std::size_t n, std::uint64_t first_page = 0);

/// Median of consecutive differences of the sorted completion cycles.
Cycle median_gap(std::vector<Cycle> completions);

/// Cycles from a persist's first leaf update to its root update, for the
/// persists that updated the root themselves.
std::vector<Cycle> critical_paths(const Engine& engine);

}  // namespace plp
