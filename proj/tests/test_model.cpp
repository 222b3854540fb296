#include <doctest.h>

#include <random>
#include <set>

#include "plpsim/model.hpp"

using namespace plp;

TEST_CASE("block addresses must be 64-byte aligned") {
  CHECK_NOTHROW(BlockAddr::from(0x1040));
  CHECK_THROWS_AS(BlockAddr::from(0x1001), InputError);
  const auto a = BlockAddr::from(3 * kPageBytes + 5 * kBlockBytes);
  CHECK(a.page() == 3);
  CHECK(a.block_in_page() == 5);
  CHECK(to_hex(a) == "0x3140");
}

TEST_CASE("split counter bumps one minor") {
  SplitCounter c;
  CHECK_FALSE(c.bump(7));
  CHECK(c.minor(7) == 1);
  CHECK(c.minor(6) == 0);
  CHECK(c.major() == 0);
  CHECK(c.effective(7).scalar() == 1);
}

TEST_CASE("minor overflow increments the major and resets every minor") {
  SplitCounter c;
  c.bump(1);
  for (int i = 0; i < SplitCounter::kMinorMax; ++i) CHECK_FALSE(c.bump(0));
  CHECK(c.minor(0) == 127);
  CHECK(c.bump(0));
  CHECK(c.major() == 1);
  for (std::size_t b = 0; b < kBlocksPerPage; ++b) CHECK(c.minor(b) == 0);
}

TEST_CASE("bump_counter leaves its argument untouched") {
  const SplitCounter c;
  const SplitCounter d = bump_counter(c, 3);
  CHECK(c.minor(3) == 0);
  CHECK(d.minor(3) == 1);
}

TEST_CASE("counter block serializes into exactly one 64-byte block") {
  SplitCounter a, b;
  CHECK(a.serialize() == b.serialize());
  b.bump(63);
  CHECK(a.serialize() != b.serialize());
  SplitCounter c;
  c.bump(62);
  CHECK(b.serialize() != c.serialize());
  for (int i = 0; i < 127; ++i) c.bump(62);
  CHECK(c.serialize() != SplitCounter{}.serialize());
}

TEST_CASE("effective counters never repeat for a block (scalar oracle)") {
  std::mt19937_64 rng(11);
  SplitCounter c;
  std::vector<std::set<std::uint64_t>> seen(kBlocksPerPage);
  std::vector<std::uint64_t> last(kBlocksPerPage, 0);
  for (std::size_t b = 0; b < kBlocksPerPage; ++b) seen[b].insert(0);
  for (int i = 0; i < 20000; ++i) {
    const std::size_t b = rng() % 4;  // few blocks so overflows happen often
    c.bump(b);
    for (std::size_t x = 0; x < kBlocksPerPage; ++x) {
      const std::uint64_t s = c.effective(x).scalar();
      if (x == b) {
        CHECK(s > last[x]);
        CHECK(seen[x].insert(s).second);
      } else {
        CHECK(s >= last[x]);
      }
      last[x] = s;
    }
  }
  CHECK(c.major() > 0);
}

TEST_CASE("golden memory replays prefixes") {
  GoldenMemory g;
  Block x{}, y{};
  x[0] = 1;
  y[0] = 2;
  const auto a = BlockAddr::from(0);
  CHECK(g.apply_store(a, x, 0) == 0);
  CHECK(g.apply_store(a, y, 1) == 1);
  CHECK(g.state_after(0).empty());
  CHECK(g.state_after(1).at(a) == x);
  CHECK(g.state_after(2).at(a) == y);
  CHECK(g.state().at(a) == y);
  CHECK(g.log()[1].epoch == 1);
}
