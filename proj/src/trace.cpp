#include "plpsim/trace.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

namespace plp {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_hex(std::string_view tok, std::size_t line) {
  if (tok.starts_with("0x") || tok.starts_with("0X")) tok.remove_prefix(2);
  if (tok.empty()) throw TraceParseError(line, "missing address");
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, 16);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw TraceParseError(line, "bad hex address '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::vector<TraceEvent> parse_trace(std::istream& in) {
  std::vector<TraceEvent> out;
  std::string raw;
  std::size_t line = 0;
  std::uint64_t store_index = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty() || s.front() == '#') continue;
    if (s == "F") {
      out.push_back(TraceEvent::fence(line));
      continue;
    }
    if (s.size() > 2 && s[0] == 'S' && (s[1] == ' ' || s[1] == '\t')) {
      const std::uint64_t v = parse_hex(trim(s.substr(2)), line);
      BlockAddr addr;
      try {
        addr = BlockAddr::from(v);
      } catch (const InputError& e) {
        throw TraceParseError(line, e.what());
      }
      out.push_back(TraceEvent::store(addr, store_index++, line));
      continue;
    }
    throw TraceParseError(line, "unrecognized event '" + std::string(s) + "'");
  }
  return out;
}

std::vector<TraceEvent> parse_trace(const std::string& text) {
  std::istringstream in(text);
  return parse_trace(in);
}

std::vector<TraceEvent> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trace file '" + path + "'");
  return parse_trace(in);
}

std::string render_trace(std::span<const TraceEvent> trace) {
  std::string out;
  for (const auto& ev : trace) {
    if (ev.is_store()) {
      out += "S " + to_hex(ev.addr) + "\n";
    } else {
      out += "F\n";
    }
  }
  return out;
}

Block payload_for(std::uint64_t seed) {
  Block b{};
  std::uint64_t state = seed * 0x2545f4914f6cdd1dULL + 0x853c49e6748fea9bULL;
  for (std::size_t w = 0; w < 8; ++w) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    for (std::size_t i = 0; i < 8; ++i) b[w * 8 + i] = static_cast<std::uint8_t>(z >> (8 * i));
  }
  return b;
}

std::vector<TraceEvent> generate(const GenSpec& spec) {
  std::vector<TraceEvent> out;
  if (spec.stores == 0) return out;
  if (spec.pages == 0) throw InputError("generator needs at least one page");
  const std::size_t run = spec.run_length == 0 ? 1 : spec.run_length;

  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<std::uint64_t> page_dist(0, spec.pages - 1);
  std::uniform_int_distribution<std::size_t> block_dist(0, kBlocksPerPage - 1);

  std::uint64_t page = 0;
  std::size_t block = 0;
  for (std::size_t i = 0; i < spec.stores; ++i) {
    if (i % run == 0) {
      page = spec.page_base + page_dist(rng);
      block = block_dist(rng);
    } else {
      block = (block + 1) % kBlocksPerPage;
    }
    const auto addr = BlockAddr::from(page * kPageBytes + block * kBlockBytes);
    out.push_back(TraceEvent::store(addr, i));
    if (spec.fence_interval != 0 && (i + 1) % spec.fence_interval == 0 && i + 1 != spec.stores) {
      out.push_back(TraceEvent::fence());
    }
  }
  return out;
}

std::size_t count_stores(std::span<const TraceEvent> trace) {
  std::size_t n = 0;
  for (const auto& ev : trace) n += ev.is_store() ? 1 : 0;
  return n;
}

}  // namespace plp
