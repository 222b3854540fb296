#include "plpsim/timing.hpp"

namespace plp {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::epoch_retire: return "epoch-retire";
    case EventKind::mac_done: return "mac-done";
    case EventKind::fill_done: return "fill-done";
    case EventKind::tuple_arrived: return "tuple-component-arrived";
    case EventKind::drain: return "drain";
    case EventKind::wake: return "wake";
  }
  return "?";
}

void EventQueue::push(Cycle cycle, EventKind kind, std::uint64_t a, std::uint64_t b) {
  heap_.push(Event{cycle, kind, next_seq_++, a, b});
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

}  // namespace plp
