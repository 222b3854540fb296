// Discrete-event clock: latency knobs and a deterministic event queue.
#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "plpsim/model.hpp"

namespace plp {

/// All latencies are processor cycles.
struct LatencyConfig {
  Cycle mac = 40;
  Cycle cache_hit = 2;
  Cycle cache_fill = 200;
  Cycle wpq_enqueue = 1;
  /// One WPQ entry drains to NVMM per interval.
  Cycle drain_interval = 8;
};

/// Kinds double as same-cycle priorities (lower fires first).
enum class EventKind : std::uint8_t {
  epoch_retire = 0,
  mac_done = 1,
  fill_done = 2,
  tuple_arrived = 3,
  drain = 4,
  wake = 5,
};

const char* to_string(EventKind kind);

struct Event {
  Cycle cycle = 0;
  EventKind kind = EventKind::wake;
  std::uint64_t seq = 0;
  std::uint64_t a = 0;  // persist id / PTT slot / epoch id
  std::uint64_t b = 0;  // node label / component index
};

/// Min-queue ordered by (cycle, kind, insertion sequence).
class EventQueue {
 public:
  void push(Cycle cycle, EventKind kind, std::uint64_t a = 0, std::uint64_t b = 0);
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      if (x.cycle != y.cycle) return x.cycle > y.cycle;
      if (x.kind != y.kind) return x.kind > y.kind;
      return x.seq > y.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace plp
