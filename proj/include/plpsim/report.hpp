// JSON and CSV renderings of configs, run results and recovery reports.
#pragma once

#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "plpsim/config.hpp"
#include "plpsim/crash.hpp"
#include "plpsim/sim.hpp"

namespace plp {

using Json = nlohmann::ordered_json;

std::string hex_tag(Tag t);

Json config_json(const RunConfig& cfg);
Json result_json(const RunResult& r);
Json cache_json(const CacheStats& s);

/// Single-run report: resolved config, its hash, results and, when given,
/// the slowdown relative to a baseline run of the same trace.
Json run_report(const RunConfig& cfg, const RunResult& r, const std::optional<RunResult>& baseline = std::nullopt);

Json recovery_json(const RecoveryReport& r, bool include_blocks = false);

/// Node updates, durability records and epoch retirements as one CSV log.
void write_event_log(std::ostream& out, const RunResult& r);

/// CSV header and row used by sweeps.
std::string sweep_csv_header();
std::string sweep_csv_row(const std::string& axis, const std::string& value, const RunResult& r);

}  // namespace plp
