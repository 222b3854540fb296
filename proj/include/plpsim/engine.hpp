// The secure persist path: write-pending queue with two-step persist, the
// persist tracking table (PTT), the epoch tracking table (ETT) and the four
// BMT update schedulers.
//
//   sequential  one persist in the BMT at a time (strict persistency)
//   pipeline    lockstep level waves, roots in persist order (strict)
//   ooo         per-persist out-of-order progress inside an epoch, epochs
//               kept on disjoint tree levels (epoch persistency)
//   coalesce    ooo plus paired coalescing at the LCA of adjacent persists
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "plpsim/bmt.hpp"
#include "plpsim/cache.hpp"
#include "plpsim/crypto.hpp"
#include "plpsim/model.hpp"
#include "plpsim/timing.hpp"
#include "plpsim/trace.hpp"

namespace plp {

enum class Scheme { sequential, pipeline, ooo, coalesce };

const char* to_string(Scheme s);
/// Throws InputError for unknown names.
Scheme parse_scheme(const std::string& name);
inline bool is_epoch_scheme(Scheme s) { return s == Scheme::ooo || s == Scheme::coalesce; }

struct EngineConfig {
  Scheme scheme = Scheme::sequential;
  std::size_t wpq_capacity = 128;
  std::size_t ptt_capacity = 64;
  std::size_t ett_capacity = 2;
  /// Fence interval used when the trace is generated.
  /// MAC units per tree level.
  unsigned mac_units = 1;
  /// Unset: non-pipelined for strict schemes, pipelined for epoch schemes.
  std::optional<bool> mac_pipelined;
  bool record_events = true;

  bool pipelined_mac() const { return mac_pipelined.value_or(is_epoch_scheme(scheme)); }
};

struct SimConfig {
  BmtGeometry geometry;
  LatencyConfig latency;
  CacheConfig counter_cache;
  CacheConfig mac_cache;
  CacheConfig bmt_cache;
  EngineConfig engine;
  std::uint64_t seed = 1;

  void validate() const;
  /// Makes all three caches ideal (every access hits).
  void set_ideal_caches(bool ideal);
};

/// Raised when events run out while persists are still outstanding.
class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Component : std::uint8_t { ciphertext = 0, counter = 1, mac = 2, root = 3 };
const char* to_string(Component c);

/// One block written by a tuple. Counter overflow adds the page's other
/// resident blocks, re-encrypted under the new major counter.
struct TupleWrite {
  BlockAddr addr;
  Block ciphertext{};
  Tag mac = 0;
};

enum class WpqState { locked_incomplete, complete, drained };

struct WpqEntry {
  PersistId persist = 0;
  EpochId epoch = 0;
  BlockAddr addr;
  std::uint64_t page = 0;
  SplitCounter counter;
  std::vector<TupleWrite> blocks;
  bool ciphertext_arrived = false;
  bool counter_arrived = false;
  bool mac_arrived = false;
  bool root_done = false;
  /// Epoch persistency: held back until every older epoch has completed.
  bool locked = true;
  WpqState state = WpqState::locked_incomplete;

  bool has(Component c) const;
  bool all_arrived() const { return ciphertext_arrived && counter_arrived && mac_arrived; }
};

enum class PttPhase { waiting, fetching, issued, stopped, finished };

struct PttEntry {
  bool valid = false;      // V
  bool ready = false;      // R
  bool persisted = false;  // P
  unsigned level = 0;      // Lvl
  Label pending_node = 0;  // PendingNode
  PersistId persist = 0;   // WPQptr (by persist id)
  EpochId epoch = 0;       // EID

  PttPhase phase = PttPhase::waiting;
  bool started = false;  // entered the BMT update path
  bool looked_up = false;
  Cycle ready_at = 0;
  Tag staged_value = 0;
  bool staged = false;
  /// Coalescing: stop before updating this node.
  std::optional<Label> stop_at;
  /// Coalescing: (node, leading persist) pairs that must have stopped before
  /// this entry may update node.
  std::vector<std::pair<Label, PersistId>> waits;
};

struct EttEntry {
  EpochId eid = 0;
  bool valid = false;  // V
  bool ready = false;  // R
  unsigned level = 0;  // Lvl: deepest level any member still occupies
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t members = 0;
  std::size_t members_persisted = 0;
  std::size_t members_arrived = 0;
};

struct PersistRecord {
  PersistId id = 0;
  EpochId epoch = 0;
  BlockAddr addr;
  Label leaf = 0;
  Cycle submit = 0;
  std::optional<Cycle> leaf_start;
  std::optional<Cycle> root_done;  // P set
  std::optional<Cycle> complete;   // tuple complete in the persist domain
  std::optional<Cycle> drained;
  /// Bitmask over Component values that have reached the persist domain.
  std::uint8_t components = 0;
  bool coalesced_leading = false;
  bool updated_root = false;
  /// Persist whose root update made this one's root component durable.
  PersistId root_writer = 0;
  Tag root_before = 0;
  Tag root_after = 0;
};

struct NodeUpdateRecord {
  Cycle cycle = 0;
  PersistId persist = 0;
  EpochId epoch = 0;
  Label node = 0;
  unsigned level = 0;
};

/// A tuple component entering the durable (unlocked persist-domain) state.
struct DurabilityRecord {
  Cycle cycle = 0;
  std::uint64_t seq = 0;
  PersistId persist = 0;
  EpochId epoch = 0;
  Component component = Component::ciphertext;
};

struct EpochRecord {
  EpochId epoch = 0;
  Cycle retired = 0;
  std::uint64_t seq = 0;
  std::size_t members = 0;
};

struct StallStats {
  Cycle wpq_full = 0;
  Cycle ptt_full = 0;
  Cycle ett_full = 0;
  Cycle total() const { return wpq_full + ptt_full + ett_full; }
};

struct EngineStats {
  std::uint64_t persists_submitted = 0;
  std::uint64_t persists_completed = 0;
  std::uint64_t node_updates = 0;
  std::uint64_t root_updates = 0;
  std::uint64_t coalesces = 0;
  std::uint64_t counter_overflows = 0;
  std::uint64_t drains = 0;
  std::uint64_t epochs_retired = 0;
  StallStats stalls;
};

/// Durable persist-domain contents at a crash: the NVMM image plus the WPQ
/// entries that are not locked-incomplete (with their arrived components).
struct DurableState {
  DurableImage nvmm;
  std::vector<WpqEntry> wpq;
  Tag root_register = 0;
  Cycle cycle = 0;
};

class Engine {
 public:
  Engine(SimConfig config, std::vector<TraceEvent> trace);

  /// Processes one event; runs the scheduler when the cycle's batch is done.
  /// Returns false when there is nothing left to process.
  bool step();
  /// step() split in two: process one event, then run the scheduler if the
  /// cycle's batch is complete. Lets a caller observe state between them.
  bool step_event();
  void finish_batch();
  /// Throws DeadlockError if outstanding persists can never complete.
  void run_until_idle();
  /// Processes every event that fires before `cycle`.
  void run_before(Cycle cycle);

  bool done() const;
  Cycle now() const { return now_; }
  std::optional<Cycle> next_event_cycle() const;

  const SimConfig& config() const { return config_; }
  const KeySet& keys() const { return keys_; }
  const BmtState& tree() const { return tree_; }
  Tag root_register() const { return tree_.root_register(); }
  const EngineStats& stats() const { return stats_; }
  const MetadataCaches& caches() const { return caches_; }
  MetadataCaches& caches() { return caches_; }

  const std::vector<PersistRecord>& persists() const { return records_; }
  const std::vector<NodeUpdateRecord>& node_log() const { return node_log_; }
  const std::vector<DurabilityRecord>& durability_log() const { return durability_log_; }
  const std::vector<EpochRecord>& epoch_log() const { return epoch_log_; }
  /// Every WPQ entry written to NVMM, in drain order (kept when
  /// record_events is set).
  const std::vector<WpqEntry>& drained_entries() const { return drain_log_; }

  /// Cycle at which the last persist became durable (0 for an empty trace).
  Cycle completion_cycle() const { return completion_cycle_; }
  Cycle last_drain_cycle() const { return last_drain_cycle_; }
  /// Cycles from submission to the first leaf update (counter access).
  std::optional<Cycle> leaf_start_offset() const;

  /// Snapshot of the persist domain. Locked-incomplete entries are dropped.
  DurableState durable_state() const;
  /// Power loss: metadata caches and interior tree nodes are discarded.
  void crash_flush();

  const std::deque<WpqEntry>& wpq() const { return wpq_; }
  std::vector<PttEntry> ptt_entries() const;
  std::vector<EttEntry> ett_entries() const { return {ett_.begin(), ett_.end()}; }
  /// Current PEC (oldest active epoch) and GEC (epoch of the next store).
  EpochId pending_epoch() const;
  EpochId global_epoch() const { return core_epoch_; }

 private:
  SimConfig config_;
  KeySet keys_;
  std::vector<TraceEvent> trace_;
  BmtState tree_;
  MetadataCaches caches_;
  EventQueue events_;
  Cycle now_ = 0;
  bool primed_ = false;

  // Core.
  std::size_t cursor_ = 0;
  Cycle next_submit_ = 0;
  EpochId core_epoch_ = 0;
  std::size_t stores_in_core_epoch_ = 0;
  std::optional<Cycle> stall_since_;
  int stall_cause_ = -1;

  // Functional memory state.
  std::unordered_map<std::uint64_t, SplitCounter> counters_;
  std::unordered_map<std::uint64_t, Block> plain_view_;
  struct CounterVersion {
    std::uint64_t key;
    SplitCounter counter;
  };
  std::unordered_map<std::uint64_t, std::vector<CounterVersion>> counter_history_;
  DurableImage nvmm_;

  // Persist domain and scheduler tables.
  std::deque<WpqEntry> wpq_;
  std::vector<PttEntry> ptt_;
  std::size_t ptt_head_ = 0;
  std::size_t ptt_count_ = 0;
  std::deque<EttEntry> ett_;
  std::optional<PersistId> last_in_epoch_;
  std::vector<std::vector<Cycle>> mac_free_;  // per level, per unit
  std::vector<PersistId> wave_;  // pipeline: current wave, oldest first
  bool drain_scheduled_ = false;
  Cycle drain_free_at_ = 0;
  std::set<Cycle> wakes_;
  // Outstanding metadata fills by key; later accesses wait for them.
  std::unordered_map<std::uint64_t, Cycle> counter_fills_;
  std::unordered_map<std::uint64_t, Cycle> mac_fills_;
  std::unordered_map<std::uint64_t, Cycle> bmt_fills_;

  // Records.
  std::vector<PersistRecord> records_;
  std::unordered_map<PersistId, std::size_t> slot_of_;
  std::vector<NodeUpdateRecord> node_log_;
  std::vector<DurabilityRecord> durability_log_;
  std::vector<EpochRecord> epoch_log_;
  std::vector<WpqEntry> drain_log_;
  std::uint64_t log_seq_ = 0;
  EngineStats stats_;
  Cycle completion_cycle_ = 0;
  Cycle last_drain_cycle_ = 0;

  void handle(const Event& ev);
  void schedule_pass();
  bool pass_once();
  void wake_at(Cycle c);

  bool submit_from_core();
  void submit_store(const TraceEvent& ev);
  void plan_coalesce(PersistId prev, std::size_t new_slot);
  void end_stall();

  bool sequential_pass();
  bool pipeline_pass();
  bool ooo_pass();
  bool try_issue(std::size_t slot);
  Cycle metadata_access(SetAssocCache& cache, std::unordered_map<std::uint64_t, Cycle>& fills,
                        std::uint64_t key, Cycle verify);
  bool epoch_gate(const PttEntry& e) const;
  bool waits_satisfied(const PttEntry& e) const;
  unsigned readable_level(const PttEntry& e) const;
  Tag compute_update(const PttEntry& e) const;
  std::uint64_t order_key(const PttEntry& e) const;

  void on_mac_done(std::size_t slot, Label node);
  void advance(PttEntry& e);
  void refresh_ett_levels();
  void set_persisted(std::size_t slot, PersistId writer);
  bool pop_ptt();
  bool update_locks();
  bool check_epoch_retire();
  void on_epoch_retire(EpochId eid);
  bool try_drain();
  void on_drain();
  void on_tuple_arrived(PersistId id, Component c);
  void check_complete(PersistId id);
  bool older_incomplete(const PttEntry& e) const;
  void record_durable(const WpqEntry& w, Component c);

  WpqEntry* wpq_find(PersistId id);
  EttEntry* ett_find(EpochId eid);
  PttEntry& slot(std::size_t i) { return ptt_[i]; }
  std::size_t ptt_index(std::size_t offset) const { return (ptt_head_ + offset) % ptt_.size(); }
};

}  // namespace plp
