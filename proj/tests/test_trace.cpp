#include <doctest.h>

#include <set>

#include "plpsim/trace.hpp"

using namespace plp;

TEST_CASE("parse stores and fences") {
  const auto t = parse_trace(std::string("S 0x1000\nS 0x1040\nF\n"));
  REQUIRE(t.size() == 3);
  CHECK(t[0].is_store());
  CHECK(t[0].addr.value() == 0x1000);
  CHECK(t[1].payload_seed == 1);
  CHECK_FALSE(t[2].is_store());
  CHECK(t[2].line == 3);
}

TEST_CASE("comments, blank lines and empty files") {
  CHECK(parse_trace(std::string("")).empty());
  const auto t = parse_trace(std::string("# header\n\n  S 40  \n"));
  REQUIRE(t.size() == 1);
  CHECK(t[0].addr.value() == 0x40);
  CHECK(t[0].line == 3);
}

TEST_CASE("parse errors carry the line") {
  try {
    parse_trace(std::string("S 0x1001"));
    FAIL("expected an error");
  } catch (const TraceParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse_trace(std::string("F\nX 12\n"));
    FAIL("expected an error");
  } catch (const TraceParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_trace(std::string("S zz\n")), TraceParseError);
  CHECK_THROWS_AS(parse_trace(std::string("S\n")), TraceParseError);
  CHECK_THROWS_AS(load_trace("/nonexistent/trace.txt"), InputError);
}

TEST_CASE("render and parse round-trip") {
  GenSpec g;
  g.stores = 300;
  g.fence_interval = 7;
  const auto t = generate(g);
  const auto back = parse_trace(render_trace(t));
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back[i].kind == t[i].kind);
    CHECK(back[i].addr == t[i].addr);
    CHECK(back[i].payload_seed == t[i].payload_seed);
  }
}

TEST_CASE("generation is deterministic in the seed") {
  GenSpec g;
  g.stores = 100;
  CHECK(render_trace(generate(g)) == render_trace(generate(g)));
  GenSpec h = g;
  h.seed = 2;
  CHECK(render_trace(generate(g)) != render_trace(generate(h)));
}

TEST_CASE("run length keeps consecutive stores in one page") {
  GenSpec g;
  g.stores = 64;
  g.run_length = 64;
  g.fence_interval = 0;
  std::set<std::uint64_t> pages;
  std::set<std::uint64_t> blocks;
  for (const auto& e : generate(g)) {
    pages.insert(e.addr.page());
    blocks.insert(e.addr.value());
  }
  CHECK(pages.size() == 1);
  CHECK(blocks.size() == 64);
}

TEST_CASE("fence interval k yields epochs of exactly k stores except the last") {
  GenSpec g;
  g.stores = 100;
  g.fence_interval = 32;
  std::vector<std::size_t> sizes{0};
  for (const auto& e : generate(g)) {
    if (e.is_store()) {
      ++sizes.back();
    } else {
      sizes.push_back(0);
    }
  }
  CHECK(sizes == std::vector<std::size_t>{32, 32, 32, 4});
  CHECK(count_stores(generate(g)) == 100);
}

TEST_CASE("payloads are deterministic and distinct") {
  CHECK(payload_for(1) == payload_for(1));
  CHECK(payload_for(1) != payload_for(2));
}

TEST_CASE("generator honours the page window") {
  GenSpec g;
  g.pages = 4;
  g.page_base = 10;
  for (const auto& e : generate(g)) {
    if (e.is_store()) {
      CHECK(e.addr.page() >= 10);
      CHECK(e.addr.page() < 14);
    }
  }
  GenSpec none;
  none.pages = 0;
  CHECK_THROWS_AS(generate(none), InputError);
}
