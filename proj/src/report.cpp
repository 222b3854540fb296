#include "plpsim/report.hpp"

#include <cstdio>

namespace plp {

std::string hex_tag(Tag t) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(t));
  return buf;
}

Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& f : config_fields()) j[f.section][f.key] = f.get(cfg);
  return j;
}

Json cache_json(const CacheStats& s) {
  return Json{{"accesses", s.accesses}, {"hits", s.hits},           {"misses", s.misses},
              {"evictions", s.evictions}, {"writebacks", s.writebacks}, {"hit_ratio", s.hit_ratio()}};
}

Json result_json(const RunResult& r) {
  Json j;
  j["scheme"] = to_string(r.scheme);
  j["persists"] = r.persists;
  j["epochs"] = r.epochs;
  j["total_cycles"] = r.total_cycles;
  j["drain_cycles"] = r.drain_cycles;
  j["leaf_start_offset"] = r.leaf_start_offset ? Json(*r.leaf_start_offset) : Json(nullptr);
  j["node_updates"] = r.stats.node_updates;
  j["root_updates"] = r.stats.root_updates;
  j["coalesces"] = r.stats.coalesces;
  j["counter_overflows"] = r.stats.counter_overflows;
  j["drains"] = r.stats.drains;
  j["epochs_retired"] = r.stats.epochs_retired;
  j["stalls"] = {{"wpq_full", r.stats.stalls.wpq_full},
                 {"ptt_full", r.stats.stalls.ptt_full},
                 {"ett_full", r.stats.stalls.ett_full},
                 {"total", r.stats.stalls.total()}};
  j["caches"] = {{"counter", cache_json(r.caches.counter)},
                 {"mac", cache_json(r.caches.mac)},
                 {"bmt", cache_json(r.caches.bmt)}};
  j["final_root"] = hex_tag(r.final_root);
  return j;
}

Json run_report(const RunConfig& cfg, const RunResult& r, const std::optional<RunResult>& baseline) {
  Json j;
  j["config"] = config_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["seed"] = cfg.seed;
  j["result"] = result_json(r);
  if (baseline) {
    const double slowdown =
        baseline->total_cycles == 0 ? 0.0 : double(r.total_cycles) / double(baseline->total_cycles);
    j["baseline"] = {{"scheme", to_string(baseline->scheme)},
                     {"total_cycles", baseline->total_cycles},
                     {"normalized_slowdown", slowdown}};
  }
  return j;
}

Json recovery_json(const RecoveryReport& r, bool include_blocks) {
  Json j;
  j["scheme"] = to_string(r.scheme);
  j["crash_cycle"] = r.crash_cycle;
  j["consistent"] = r.consistent;
  j["exact"] = r.exact;
  j["reason"] = r.reason;
  j["bmt_failure"] = r.bmt_failure;
  j["root_register"] = hex_tag(r.root_register);
  j["rebuilt_root"] = hex_tag(r.rebuilt_root);
  j["blocks"] = r.blocks.size();
  j["mac_failures"] = r.mac_failures;
  j["wrong_plaintext"] = r.wrong_plaintext;
  j["incomplete_epoch_blocks"] = r.incomplete_epoch_blocks;
  if (is_epoch_scheme(r.scheme)) {
    j["reference_epoch"] = r.reference_epoch ? Json(*r.reference_epoch) : Json(nullptr);
    j["in_flight_epochs"] = Json(std::vector<EpochId>(r.in_flight_epochs.begin(), r.in_flight_epochs.end()));
  } else {
    j["matching_prefixes"] = r.matching_prefixes;
  }
  if (include_blocks) {
    Json blocks = Json::array();
    for (const auto& v : r.blocks) {
      blocks.push_back({{"addr", to_hex(v.addr)},
                        {"mac_failure", v.mac_failure},
                        {"wrong_plaintext", v.wrong_plaintext},
                        {"incomplete_epoch", v.incomplete_epoch}});
    }
    j["block_verdicts"] = std::move(blocks);
  }
  return j;
}

void write_event_log(std::ostream& out, const RunResult& r) {
  out << "kind,cycle,persist,epoch,detail\n";
  for (const auto& n : r.node_log) {
    out << "node," << n.cycle << ',' << n.persist << ',' << n.epoch << ",L" << n.level << ':' << n.node << '\n';
  }
  for (const auto& d : r.durability_log) {
    out << "durable," << d.cycle << ',' << d.persist << ',' << d.epoch << ',' << to_string(d.component) << '\n';
  }
  for (const auto& e : r.epoch_log) {
    out << "retire," << e.retired << ",," << e.epoch << ',' << e.members << '\n';
  }
}

std::string sweep_csv_header() {
  return "axis,value,scheme,total_cycles,drain_cycles,persists,node_updates,root_updates,coalesces,"
         "stall_cycles,counter_hit_ratio,mac_hit_ratio,bmt_hit_ratio";
}

std::string sweep_csv_row(const std::string& axis, const std::string& value, const RunResult& r) {
  char ratios[96];
  std::snprintf(ratios, sizeof ratios, "%.6f,%.6f,%.6f", r.caches.counter.hit_ratio(), r.caches.mac.hit_ratio(),
                r.caches.bmt.hit_ratio());
  return axis + ',' + value + ',' + to_string(r.scheme) + ',' + std::to_string(r.total_cycles) + ',' +
         std::to_string(r.drain_cycles) + ',' + std::to_string(r.persists) + ',' +
         std::to_string(r.stats.node_updates) + ',' + std::to_string(r.stats.root_updates) + ',' +
         std::to_string(r.stats.coalesces) + ',' + std::to_string(r.stats.stalls.total()) + ',' + ratios;
}

}  // namespace plp
