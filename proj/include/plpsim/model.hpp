// Core value types shared by every part of the simulator: block addresses,
// split counters, memory tuples and the golden (plaintext) reference memory.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace plp {

using Cycle = std::uint64_t;
using PersistId = std::uint64_t;
using EpochId = std::uint64_t;
using Tag = std::uint64_t;

inline constexpr std::size_t kBlockBytes = 64;
inline constexpr std::size_t kPageBytes = 4096;
inline constexpr std::size_t kBlocksPerPage = kPageBytes / kBlockBytes;

using Block = std::array<std::uint8_t, kBlockBytes>;

/// Malformed user input: misaligned addresses, bad trace lines, bad config.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A 64-byte aligned physical block address.
class BlockAddr {
 public:
  constexpr BlockAddr() = default;

  /// Throws InputError unless `value` is a multiple of the block size.
  static BlockAddr from(std::uint64_t value);

  constexpr std::uint64_t value() const { return value_; }
  constexpr std::uint64_t page() const { return value_ / kPageBytes; }
  constexpr std::size_t block_in_page() const {
    return static_cast<std::size_t>((value_ / kBlockBytes) % kBlocksPerPage);
  }

  friend constexpr auto operator<=>(BlockAddr, BlockAddr) = default;

 private:
  constexpr explicit BlockAddr(std::uint64_t v) : value_(v) {}
  std::uint64_t value_ = 0;
};

std::string to_hex(BlockAddr addr);

/// The (major, minor) pair that seeds one block's pad.
struct EffectiveCounter {
  std::uint64_t major = 0;
  std::uint8_t minor = 0;

  /// Monotone scalar view, major * 128 + minor.
  constexpr std::uint64_t scalar() const { return major * 128 + minor; }
  friend constexpr auto operator<=>(const EffectiveCounter&, const EffectiveCounter&) = default;
};

/// Per-page major counter plus 64 seven-bit minor counters, packed into one
/// 64-byte metadata block.
class SplitCounter {
 public:
  static constexpr std::uint8_t kMinorMax = 127;

  std::uint64_t major() const { return major_; }
  std::uint8_t minor(std::size_t block_in_page) const;
  EffectiveCounter effective(std::size_t block_in_page) const;

  /// Increments one minor counter. Returns true when the minor overflowed,
  /// in which case the major was incremented and every minor reset to zero.
  bool bump(std::size_t block_in_page);

  /// 8-byte little-endian major followed by 64 packed 7-bit minors.
  Block serialize() const;

  friend bool operator==(const SplitCounter&, const SplitCounter&) = default;

 private:
  std::uint64_t major_ = 0;
  std::array<std::uint8_t, kBlocksPerPage> minors_{};
};

/// Functional form of a counter write-back: returns the bumped copy.
SplitCounter bump_counter(SplitCounter counter, std::size_t block_in_page);

/// Everything that has to be durable for one persisted block.
struct MemoryTuple {
  BlockAddr addr;
  Block ciphertext{};
  EffectiveCounter counter;
  Tag mac = 0;
  bool root_done = false;
};

/// Durable contents of the NVMM image: data ciphertexts, per-block MACs,
/// per-page counter blocks and the on-chip root register.
struct DurableImage {
  std::map<BlockAddr, Block> ciphertext;
  std::map<BlockAddr, Tag> macs;
  std::map<std::uint64_t, SplitCounter> counters;
  Tag root_register = 0;
};

struct PersistLogEntry {
  PersistId id = 0;
  BlockAddr addr;
  Block plaintext{};
  EpochId epoch = 0;
};

/// Plaintext reference memory used as the oracle for recovery equivalence.
class GoldenMemory {
 public:
  PersistId apply_store(BlockAddr addr, const Block& data, EpochId epoch);

  const std::map<BlockAddr, Block>& state() const { return state_; }
  const std::vector<PersistLogEntry>& log() const { return log_; }

  /// Plaintext state after the first `count` persists of the log.
  std::map<BlockAddr, Block> state_after(std::size_t count) const;

 private:
  std::map<BlockAddr, Block> state_;
  std::vector<PersistLogEntry> log_;
};

}  // namespace plp
