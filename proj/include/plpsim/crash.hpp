// Crash injection, recovery and the recovery-consistency checks.
//
// A crash keeps only the persist domain: NVMM, the WPQ entries that are not
// locked-incomplete and the root register. Recovery replays those entries,
// rebuilds the tree root from the durable counter blocks, checks every
// block's MAC and decrypts it.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "plpsim/engine.hpp"

namespace plp {

enum class CrashMode { at_cycle, after_persist, epoch_boundary, omission };

const char* to_string(CrashMode m);
CrashMode parse_crash_mode(const std::string& name);
Component parse_component(const std::string& name);

struct CrashPlan {
  CrashMode mode = CrashMode::at_cycle;
  /// at_cycle: everything strictly before this cycle has happened.
  Cycle cycle = 0;
  /// after_persist / omission: the cut follows this persist's completion.
  PersistId persist = 0;
  /// epoch_boundary: the cut follows this epoch's retirement.
  EpochId epoch = 0;
  /// omission: the component of `persist` that is lost.
  Component omit = Component::ciphertext;
};

struct CrashSnapshot {
  Scheme scheme = Scheme::sequential;
  Cycle cycle = 0;
  DurableState state;
  /// Persists complete in the persist domain (all four components).
  std::size_t completed_persists = 0;
  /// Newest epoch E such that every epoch up to E has retired.
  std::optional<EpochId> last_retired_epoch;
  /// Persists with at least one durable component (root register included).
  std::set<PersistId> durable_persists;
  std::optional<PersistId> omitted_persist;
  std::optional<Component> omitted;
  /// The cut point was reached (false when the run ended first).
  bool reached = true;
};

/// Runs `trace` under `config` up to the plan's cut and returns what survives.
CrashSnapshot crash(const SimConfig& config, const std::vector<TraceEvent>& trace, const CrashPlan& plan);

/// Snapshot of a running engine without advancing it.
CrashSnapshot snapshot(const Engine& engine);

struct BlockVerdict {
  BlockAddr addr;
  bool mac_failure = false;
  bool wrong_plaintext = false;
  /// Written by an epoch that was in flight at the crash.
  bool incomplete_epoch = false;
  Block recovered{};
};

struct RecoveryReport {
  Scheme scheme = Scheme::sequential;
  Cycle crash_cycle = 0;
  Tag root_register = 0;
  Tag rebuilt_root = 0;
  bool bmt_failure = false;
  std::size_t mac_failures = 0;
  std::size_t wrong_plaintext = 0;
  std::size_t incomplete_epoch_blocks = 0;
  std::vector<BlockVerdict> blocks;
  std::map<BlockAddr, Block> recovered;

  /// Strict persistency: persist-count prefixes the recovered memory equals.
  std::vector<std::size_t> matching_prefixes;
  /// Epoch persistency: the epoch used as the reference point.
  std::optional<EpochId> reference_epoch;
  std::set<EpochId> in_flight_epochs;

  /// Recovery produced a state some persist order allows.
  bool consistent = false;
  /// Recovery produced exactly the state at the crash's durable point.
  bool exact = false;
  std::string reason;

  /// Any integrity check fired.
  bool detected() const { return bmt_failure || mac_failures > 0; }
};

RecoveryReport recover(const SimConfig& config, const std::vector<TraceEvent>& trace,
                       const CrashSnapshot& snap);

/// Failure kinds observed for one block: any of "bmt_failure" (global),
/// "mac_failure" and "wrong_plaintext" (against `written`).
std::set<std::string> block_verdict(const RecoveryReport& r, BlockAddr addr, const Block& written);

struct OmissionRow {
  Component omitted = Component::ciphertext;
  std::set<std::string> expected;
  std::set<std::string> observed;
  bool match() const { return expected == observed; }
};

/// Drops each tuple component of one persist in turn, right after it
/// completes, and records what recovery reports for its block.
std::vector<OmissionRow> omission_matrix(const SimConfig& config);

}  // namespace plp
