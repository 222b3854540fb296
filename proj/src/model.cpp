#include "plpsim/model.hpp"

#include <cstdio>

namespace plp {

BlockAddr BlockAddr::from(std::uint64_t value) {
  if (value % kBlockBytes != 0) {
    throw InputError("address " + to_hex(BlockAddr(value)) + " is not 64-byte aligned");
  }
  return BlockAddr(value);
}

std::string to_hex(BlockAddr addr) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(addr.value()));
  return buf;
}

std::uint8_t SplitCounter::minor(std::size_t block_in_page) const {
  if (block_in_page >= kBlocksPerPage) throw InputError("minor counter index out of range");
  return minors_[block_in_page];
}

EffectiveCounter SplitCounter::effective(std::size_t block_in_page) const {
  return {major_, minor(block_in_page)};
}

bool SplitCounter::bump(std::size_t block_in_page) {
  if (block_in_page >= kBlocksPerPage) throw InputError("minor counter index out of range");
  if (minors_[block_in_page] == kMinorMax) {
    ++major_;
    minors_.fill(0);
    return true;
  }
  ++minors_[block_in_page];
  return false;
}

Block SplitCounter::serialize() const {
  Block out{};
  for (std::size_t i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(major_ >> (8 * i));
  // 64 minors x 7 bits = 448 bits = 56 bytes.
  std::size_t bit = 64;
  for (std::uint8_t m : minors_) {
    for (int b = 0; b < 7; ++b, ++bit) {
      if ((m >> b) & 1U) out[bit / 8] |= static_cast<std::uint8_t>(1U << (bit % 8));
    }
  }
  return out;
}

SplitCounter bump_counter(SplitCounter counter, std::size_t block_in_page) {
  counter.bump(block_in_page);
  return counter;
}

PersistId GoldenMemory::apply_store(BlockAddr addr, const Block& data, EpochId epoch) {
  const PersistId id = log_.size();
  state_[addr] = data;
  log_.push_back({id, addr, data, epoch});
  return id;
}

std::map<BlockAddr, Block> GoldenMemory::state_after(std::size_t count) const {
  std::map<BlockAddr, Block> out;
  for (std::size_t i = 0; i < count && i < log_.size(); ++i) out[log_[i].addr] = log_[i].plaintext;
  return out;
}

}  // namespace plp
