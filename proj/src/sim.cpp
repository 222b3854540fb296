#include "plpsim/sim.hpp"

#include <algorithm>
#include <set>

namespace plp {

RunResult simulate(const SimConfig& config, const std::vector<TraceEvent>& trace) {
  Engine eng(config, trace);
  eng.run_until_idle();

  RunResult r;
  r.scheme = config.engine.scheme;
  r.persists = eng.persists().size();
  std::set<EpochId> epochs;
  for (const auto& p : eng.persists()) {
    epochs.insert(p.epoch);
    r.completions.push_back(p.complete.value_or(0));
  }
  r.epochs = epochs.size();
  r.total_cycles = eng.completion_cycle();
  r.drain_cycles = eng.last_drain_cycle();
  r.leaf_start_offset = eng.leaf_start_offset();
  r.stats = eng.stats();
  r.caches = {eng.caches().counter.stats(), eng.caches().mac.stats(), eng.caches().bmt.stats()};
  r.final_root = eng.root_register();
  r.node_log = eng.node_log();
  r.durability_log = eng.durability_log();
  r.epoch_log = eng.epoch_log();
  return r;
}

std::vector<TraceEvent> distinct_page_trace(std::size_t n, std::uint64_t first_page) {
  std::vector<TraceEvent> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(TraceEvent::store(BlockAddr::from((first_page + i) * kPageBytes), i));
  }
  return out;
}

Cycle median_gap(std::vector<Cycle> completions) {
  if (completions.size() < 2) return 0;
  std::sort(completions.begin(), completions.end());
  std::vector<Cycle> gaps;
  for (std::size_t i = 1; i < completions.size(); ++i) gaps.push_back(completions[i] - completions[i - 1]);
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  return gaps[gaps.size() / 2];
}

std::vector<Cycle> critical_paths(const Engine& engine) {
  std::vector<Cycle> out;
  for (const auto& p : engine.persists()) {
    if (p.updated_root && p.leaf_start && p.root_done) out.push_back(*p.root_done - *p.leaf_start);
  }
  return out;
}

}  // namespace plp
