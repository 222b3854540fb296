#include "plpsim/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace plp {
namespace {

template <typename T>
T parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size() ||
      out > std::uint64_t(std::numeric_limits<T>::max())) {
    throw InputError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<T>(out);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw InputError(key + ": expected true or false, got '" + v + "'");
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
ConfigField uint_field(std::string section, std::string key, std::string help, T RunConfig::*member) {
  const std::string k = key;
  return {std::move(section), std::move(key), std::move(help),
          [member, k](RunConfig& c, const std::string& v) { c.*member = parse_uint<T>(k, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}

ConfigField bool_field(std::string section, std::string key, std::string help, bool RunConfig::*member) {
  const std::string k = key;
  return {std::move(section), std::move(key), std::move(help),
          [member, k](RunConfig& c, const std::string& v) { c.*member = parse_bool(k, v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}

std::vector<ConfigField> build_fields() {
  std::vector<ConfigField> f;
  f.push_back({"sim", "scheme", "BMT update scheme: sequential, pipeline, ooo, coalesce",
               [](RunConfig& c, const std::string& v) { c.scheme = parse_scheme(v); },
               [](const RunConfig& c) { return std::string(to_string(c.scheme)); }});
  f.push_back(uint_field("sim", "seed", "key and generator seed", &RunConfig::seed));
  f.push_back({"sim", "format", "output format: json or csv",
               [](RunConfig& c, const std::string& v) {
                 if (v == "json") {
                   c.format = OutputFormat::json;
                 } else if (v == "csv") {
                   c.format = OutputFormat::csv;
                 } else {
                   throw InputError("format: expected json or csv, got '" + v + "'");
                 }
               },
               [](const RunConfig& c) { return std::string(c.format == OutputFormat::json ? "json" : "csv"); }});

  f.push_back(uint_field("bmt", "arity", "BMT fan-out", &RunConfig::arity));
  f.push_back(uint_field("bmt", "levels", "BMT levels including root and leaves", &RunConfig::levels));

  f.push_back(uint_field("latency", "mac_latency", "cycles per MAC/hash computation", &RunConfig::mac_latency));
  f.push_back(uint_field("latency", "cache_hit", "metadata cache hit latency", &RunConfig::cache_hit));
  f.push_back(uint_field("latency", "cache_fill", "metadata cache miss fill latency", &RunConfig::cache_fill));
  f.push_back(uint_field("latency", "wpq_enqueue", "cycles to enqueue a tuple in the WPQ", &RunConfig::wpq_enqueue));
  f.push_back(uint_field("latency", "drain_interval", "cycles between WPQ drains", &RunConfig::drain_interval));

  f.push_back(uint_field("cache", "counter_cache_kb", "counter cache size (KB)", &RunConfig::counter_cache_kb));
  f.push_back(uint_field("cache", "mac_cache_kb", "MAC cache size (KB)", &RunConfig::mac_cache_kb));
  f.push_back(uint_field("cache", "bmt_cache_kb", "BMT node cache size (KB)", &RunConfig::bmt_cache_kb));
  f.push_back(uint_field("cache", "cache_ways", "associativity of the metadata caches", &RunConfig::cache_ways));
  f.push_back(bool_field("cache", "ideal_caches", "every metadata access hits", &RunConfig::ideal_caches));

  f.push_back(uint_field("engine", "wpq_capacity", "WPQ entries", &RunConfig::wpq_capacity));
  f.push_back(uint_field("engine", "ptt_capacity", "persist tracking table entries", &RunConfig::ptt_capacity));
  f.push_back(uint_field("engine", "ett_capacity", "epoch tracking table entries", &RunConfig::ett_capacity));
  f.push_back(uint_field("engine", "mac_units", "MAC units per tree level", &RunConfig::mac_units));
  f.push_back({"engine", "mac_pipelined", "auto, on or off",
               [](RunConfig& c, const std::string& v) {
                 if (v != "auto" && v != "on" && v != "off") {
                   throw InputError("mac_pipelined: expected auto, on or off, got '" + v + "'");
                 }
                 c.mac_pipelined = v;
               },
               [](const RunConfig& c) { return c.mac_pipelined; }});

  f.push_back({"trace", "trace", "trace file (empty: generate)",
               [](RunConfig& c, const std::string& v) { c.trace = v; },
               [](const RunConfig& c) { return c.trace; }});
  f.push_back(uint_field("trace", "stores", "generated stores", &RunConfig::stores));
  f.push_back(uint_field("trace", "pages", "generated page working set", &RunConfig::pages));
  f.push_back(uint_field("trace", "page_base", "first generated page", &RunConfig::page_base));
  f.push_back(uint_field("trace", "run_length", "consecutive stores per page", &RunConfig::run_length));
  f.push_back(uint_field("trace", "epoch_size", "stores per epoch (fence interval)", &RunConfig::epoch_size));
  return f;
}

}  // namespace

std::string ConfigField::flag() const {
  std::string s = "--" + key;
  for (auto& ch : s) {
    if (ch == '_') ch = '-';
  }
  return s;
}

std::string ConfigField::env_var() const {
  std::string s = kEnvPrefix + key;
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = build_fields();
  return fields;
}

const ConfigField* find_field(const std::string& key) {
  for (const auto& f : config_fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

SimConfig RunConfig::sim_config() const {
  SimConfig s;
  s.geometry = BmtGeometry(arity, levels);
  s.latency = {mac_latency, cache_hit, cache_fill, wpq_enqueue, drain_interval};
  auto cache = [&](std::uint64_t kb) {
    CacheConfig c;
    c.capacity_bytes = kb * 1024;
    c.associativity = cache_ways;
    c.hit_latency = cache_hit;
    c.fill_latency = cache_fill;
    c.ideal = ideal_caches;
    return c;
  };
  s.counter_cache = cache(counter_cache_kb);
  s.mac_cache = cache(mac_cache_kb);
  s.bmt_cache = cache(bmt_cache_kb);
  s.engine.scheme = scheme;
  s.engine.wpq_capacity = wpq_capacity;
  s.engine.ptt_capacity = ptt_capacity;
  s.engine.ett_capacity = ett_capacity;
  s.engine.mac_units = mac_units;
  if (mac_pipelined == "on") s.engine.mac_pipelined = true;
  if (mac_pipelined == "off") s.engine.mac_pipelined = false;
  s.seed = seed;
  s.validate();
  return s;
}

GenSpec RunConfig::gen_spec() const {
  GenSpec g;
  g.stores = stores;
  g.pages = pages;
  g.page_base = page_base;
  g.run_length = run_length;
  g.fence_interval = epoch_size;
  g.seed = seed;
  return g;
}

std::vector<TraceEvent> RunConfig::load_or_generate() const {
  return trace.empty() ? generate(gen_spec()) : load_trace(trace);
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(line) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') throw InputError(where + "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError(where + "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const ConfigField* f = find_field(key);
    if (f == nullptr) throw InputError(where + "unknown field '" + key + "'");
    if (!section.empty() && f->section != section) {
      throw InputError(where + "field '" + key + "' belongs in [" + f->section + "], not [" + section + "]");
    }
    try {
      f->set(cfg, value);
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str(), path);
}

void apply_env(RunConfig& cfg, const std::function<std::optional<std::string>(const std::string&)>& lookup) {
  for (const auto& f : config_fields()) {
    if (auto v = lookup(f.env_var())) {
      try {
        f.set(cfg, *v);
      } catch (const InputError& e) {
        throw InputError(f.env_var() + ": " + e.what());
      }
    }
  }
}

void apply_process_env(RunConfig& cfg) {
  apply_env(cfg, [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  });
}

std::string canonical_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : config_fields()) out += f.section + "." + f.key + "=" + f.get(cfg) + "\n";
  return out;
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace plp
