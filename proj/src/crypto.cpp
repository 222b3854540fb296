#include "plpsim/crypto.hpp"

#include <sodium.h>

#include <vector>

namespace plp {
namespace {

enum Domain : std::uint8_t { kPad = 1, kMac = 2, kNode = 3 };

static_assert(crypto_shorthash_KEYBYTES == 16);
static_assert(crypto_shorthash_BYTES == 8);

Tag prf(const std::array<std::uint8_t, 16>& key, std::span<const std::uint8_t> msg) {
  std::array<std::uint8_t, 8> out{};
  crypto_shorthash(out.data(), msg.data(), msg.size(), key.data());
  Tag t = 0;
  for (int i = 7; i >= 0; --i) t = (t << 8) | out[static_cast<std::size_t>(i)];
  return t;
}

void put64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Block pad(BlockAddr addr, EffectiveCounter ctr, const KeySet& keys) {
  Block out{};
  std::vector<std::uint8_t> seed;
  seed.reserve(26);
  for (std::size_t word = 0; word < 8; ++word) {
    seed.clear();
    seed.push_back(kPad);
    put64(seed, addr.value());
    put64(seed, ctr.major);
    seed.push_back(ctr.minor);
    seed.push_back(static_cast<std::uint8_t>(word));
    const Tag t = prf(keys.enc, seed);
    for (std::size_t b = 0; b < 8; ++b) out[word * 8 + b] = static_cast<std::uint8_t>(t >> (8 * b));
  }
  return out;
}

}  // namespace

KeySet KeySet::from_seed(std::uint64_t seed) {
  KeySet k;
  std::uint64_t s = seed ^ 0x6b65797365747631ULL;
  for (auto* key : {&k.enc, &k.mac}) {
    for (std::size_t i = 0; i < 16; i += 8) {
      const std::uint64_t v = splitmix(s);
      for (std::size_t b = 0; b < 8; ++b) (*key)[i + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
  return k;
}

Block encrypt(const Block& plaintext, BlockAddr addr, EffectiveCounter ctr, const KeySet& keys) {
  Block out = pad(addr, ctr, keys);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] ^= plaintext[i];
  return out;
}

Block decrypt(const Block& ciphertext, BlockAddr addr, EffectiveCounter ctr, const KeySet& keys) {
  return encrypt(ciphertext, addr, ctr, keys);
}

Tag mac(const Block& ciphertext, BlockAddr addr, EffectiveCounter ctr, const KeySet& keys) {
  std::vector<std::uint8_t> msg;
  msg.reserve(1 + kBlockBytes + 17);
  msg.push_back(kMac);
  msg.insert(msg.end(), ciphertext.begin(), ciphertext.end());
  put64(msg, addr.value());
  put64(msg, ctr.major);
  msg.push_back(ctr.minor);
  return prf(keys.mac, msg);
}

bool verify_mac(const Block& ciphertext, BlockAddr addr, EffectiveCounter ctr, Tag tag,
                const KeySet& keys) {
  return mac(ciphertext, addr, ctr, keys) == tag;
}

Tag hash_node(std::span<const std::uint8_t> payload, std::size_t expected_bytes,
              const KeySet& keys) {
  if (payload.size() != expected_bytes || payload.empty()) {
    throw InputError("node payload is " + std::to_string(payload.size()) + " bytes, expected " +
                     std::to_string(expected_bytes));
  }
  std::vector<std::uint8_t> msg;
  msg.reserve(payload.size() + 1);
  msg.push_back(kNode);
  msg.insert(msg.end(), payload.begin(), payload.end());
  return prf(keys.mac, msg);
}

Tag hash_children(std::span<const Tag> children, std::size_t arity, const KeySet& keys) {
  std::vector<std::uint8_t> payload;
  payload.reserve(children.size() * 8);
  for (Tag t : children) put64(payload, t);
  return hash_node(payload, arity * 8, keys);
}

Tag hash_counter_block(const SplitCounter& counter, const KeySet& keys) {
  const Block b = counter.serialize();
  return hash_node(b, kBlockBytes, keys);
}

}  // namespace plp
