// Run configuration: defaults, config files, environment overrides and the
// translation into simulator settings.
//
// Config file format:
//   # comment
//   [section]
//   key = value
// Every field is also settable as --kebab-case-key on the command line and
// as PLPSIM_UPPER_SNAKE_KEY in the environment. Precedence, lowest first:
// defaults, config file, environment, command line.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plpsim/engine.hpp"
#include "plpsim/trace.hpp"

namespace plp {

enum class OutputFormat { json, csv };

struct RunConfig {
  Scheme scheme = Scheme::sequential;

  unsigned arity = 8;
  unsigned levels = 9;

  Cycle mac_latency = 40;
  Cycle cache_hit = 2;
  Cycle cache_fill = 200;
  Cycle wpq_enqueue = 1;
  Cycle drain_interval = 8;

  std::uint64_t counter_cache_kb = 128;
  std::uint64_t mac_cache_kb = 128;
  std::uint64_t bmt_cache_kb = 128;
  unsigned cache_ways = 8;
  bool ideal_caches = false;

  std::size_t wpq_capacity = 128;
  std::size_t ptt_capacity = 64;
  std::size_t ett_capacity = 2;
  unsigned mac_units = 1;
  /// "auto", "on" or "off".
  std::string mac_pipelined = "auto";

  /// Trace file; empty means generate.
  std::string trace;
  std::size_t stores = 1000;
  std::size_t pages = 256;
  std::uint64_t page_base = 0;
  std::size_t run_length = 1;
  /// Stores per epoch; also the generator's fence interval.
  std::size_t epoch_size = 32;

  OutputFormat format = OutputFormat::json;
  std::uint64_t seed = 1;

  SimConfig sim_config() const;
  GenSpec gen_spec() const;
  /// Loads the trace file or runs the generator.
  std::vector<TraceEvent> load_or_generate() const;
};

struct ConfigField {
  std::string section;
  std::string key;  // snake_case
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;

  std::string flag() const;     // --kebab-case
  std::string env_var() const;  // PLPSIM_UPPER_SNAKE
};

const std::vector<ConfigField>& config_fields();
const ConfigField* find_field(const std::string& key);

inline constexpr const char* kEnvPrefix = "PLPSIM_";

/// Applies a config file. Unknown keys and bad values throw InputError
/// naming the file, line and field.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& origin = "config");
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Applies PLPSIM_* variables obtained through `lookup` (nullopt = unset).
void apply_env(RunConfig& cfg, const std::function<std::optional<std::string>(const std::string&)>& lookup);
void apply_process_env(RunConfig& cfg);

/// Canonical "section.key=value" lines in field order.
std::string canonical_text(const RunConfig& cfg);
/// FNV-1a 64 of canonical_text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace plp
