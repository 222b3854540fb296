// Persist traces: the line-oriented text format and a synthetic generator.
//
// Grammar, one event per line:
//   S <hex-addr>   a persist-causing store to a 64-byte aligned block
//   F              epoch boundary (persist barrier)
//   # ...          comment
// Blank lines are ignored. Store payloads are never stored in traces; the
// n-th store of a trace carries payload seed n.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "plpsim/model.hpp"

namespace plp {

struct TraceEvent {
  enum class Kind { store, fence };

  Kind kind = Kind::store;
  BlockAddr addr;
  std::uint64_t payload_seed = 0;
  std::size_t line = 0;  // 1-based source line, 0 when generated

  static TraceEvent store(BlockAddr addr, std::uint64_t payload_seed, std::size_t line = 0) {
    return {Kind::store, addr, payload_seed, line};
  }
  static TraceEvent fence(std::size_t line = 0) { return {Kind::fence, BlockAddr{}, 0, line}; }

  bool is_store() const { return kind == Kind::store; }
};

/// Parse failure with its 1-based line number.
class TraceParseError : public InputError {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::vector<TraceEvent> parse_trace(std::istream& in);
std::vector<TraceEvent> parse_trace(const std::string& text);
std::vector<TraceEvent> load_trace(const std::string& path);

std::string render_trace(std::span<const TraceEvent> trace);

/// Deterministic 64-byte plaintext for a payload seed.
Block payload_for(std::uint64_t seed);

struct GenSpec {
  std::size_t stores = 1000;
  /// Pages are drawn uniformly from [page_base, page_base + pages).
  std::size_t pages = 256;
  std::uint64_t page_base = 0;
  /// Consecutive stores that stay in one page before a new page is drawn.
  std::size_t run_length = 1;
  /// A fence after every `fence_interval` stores; 0 disables fences.
  std::size_t fence_interval = 32;
  std::uint64_t seed = 1;
};

std::vector<TraceEvent> generate(const GenSpec& spec);

std::size_t count_stores(std::span<const TraceEvent> trace);

}  // namespace plp
