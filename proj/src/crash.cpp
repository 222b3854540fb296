#include "plpsim/crash.hpp"

#include <functional>
#include <sstream>

namespace plp {

const char* to_string(CrashMode m) {
  switch (m) {
    case CrashMode::at_cycle: return "at-cycle";
    case CrashMode::after_persist: return "after-persist";
    case CrashMode::epoch_boundary: return "epoch-boundary";
    case CrashMode::omission: return "omission";
  }
  return "?";
}

CrashMode parse_crash_mode(const std::string& name) {
  if (name == "at-cycle" || name == "cycle") return CrashMode::at_cycle;
  if (name == "after-persist" || name == "persist") return CrashMode::after_persist;
  if (name == "epoch-boundary" || name == "epoch") return CrashMode::epoch_boundary;
  if (name == "omission") return CrashMode::omission;
  throw InputError("unknown crash mode '" + name + "' (at-cycle, after-persist, epoch-boundary, omission)");
}

Component parse_component(const std::string& name) {
  if (name == "C" || name == "c" || name == "ciphertext") return Component::ciphertext;
  if (name == "gamma" || name == "counter" || name == "g") return Component::counter;
  if (name == "M" || name == "m" || name == "mac") return Component::mac;
  if (name == "R" || name == "r" || name == "root") return Component::root;
  throw InputError("unknown tuple component '" + name + "' (C, gamma, M, R)");
}

namespace {

void apply_entry(DurableImage& img, const WpqEntry& w, std::optional<Component> skip = std::nullopt) {
  auto keep = [&](Component c) { return w.has(c) && skip != c; };
  for (const auto& b : w.blocks) {
    if (keep(Component::ciphertext)) img.ciphertext[b.addr] = b.ciphertext;
    if (keep(Component::mac)) img.macs[b.addr] = b.mac;
  }
  if (keep(Component::counter)) img.counters[w.page] = w.counter;
}

void apply_omission(const Engine& eng, CrashSnapshot& snap, const CrashPlan& plan) {
  const PersistId k = plan.persist;
  snap.omitted_persist = k;
  snap.omitted = plan.omit;
  if (plan.omit == Component::root) {
    const auto& rec = eng.persists().at(k);
    snap.state.root_register = eng.persists().at(rec.root_writer).root_before;
    snap.state.nvmm.root_register = snap.state.root_register;
    return;
  }
  for (auto& w : snap.state.wpq) {
    if (w.persist != k) continue;
    switch (plan.omit) {
      case Component::ciphertext: w.ciphertext_arrived = false; break;
      case Component::counter: w.counter_arrived = false; break;
      case Component::mac: w.mac_arrived = false; break;
      case Component::root: break;
    }
    return;
  }
  // Already written to NVMM: rebuild the image without that component.
  DurableImage img;
  for (const auto& w : eng.drained_entries()) {
    apply_entry(img, w, w.persist == k ? std::optional<Component>(plan.omit) : std::nullopt);
  }
  img.root_register = snap.state.root_register;
  snap.state.nvmm = std::move(img);
}

}  // namespace

CrashSnapshot snapshot(const Engine& eng) {
  CrashSnapshot s;
  s.scheme = eng.config().engine.scheme;
  s.cycle = eng.now();
  s.state = eng.durable_state();
  std::set<EpochId> retired;
  for (const auto& r : eng.epoch_log()) retired.insert(r.epoch);
  for (EpochId e = 0; retired.count(e) != 0; ++e) s.last_retired_epoch = e;
  const auto& recs = eng.persists();
  // A coalesced leading persist is marked done once its partner passes the
  // merge node; its root effect lands only with the partner's root update.
  auto root_written = [&](PersistId id) {
    while (recs[id].root_done) {
      if (recs[id].updated_root) return true;
      if (recs[id].root_writer == id) return false;
      id = recs[id].root_writer;
    }
    return false;
  };
  for (const auto& r : recs) {
    if (r.complete) ++s.completed_persists;
    if (r.drained || root_written(r.id)) s.durable_persists.insert(r.id);
  }
  for (const auto& w : s.state.wpq) {
    if (w.ciphertext_arrived || w.counter_arrived || w.mac_arrived || w.root_done) {
      s.durable_persists.insert(w.persist);
    }
  }
  return s;
}

CrashSnapshot crash(const SimConfig& config, const std::vector<TraceEvent>& trace, const CrashPlan& plan) {
  Engine eng(config, trace);
  std::function<bool()> reached;
  const std::size_t stores = count_stores(trace);
  switch (plan.mode) {
    case CrashMode::at_cycle:
      eng.run_before(plan.cycle);
      break;
    case CrashMode::after_persist:
    case CrashMode::omission:
      if (plan.persist >= stores) {
        throw InputError("crash persist " + std::to_string(plan.persist) + " out of range (trace has " +
                         std::to_string(stores) + " stores)");
      }
      reached = [&] { return plan.persist < eng.persists().size() && eng.persists()[plan.persist].complete; };
      break;
    case CrashMode::epoch_boundary:
      reached = [&] {
        for (const auto& r : eng.epoch_log()) {
          if (r.epoch == plan.epoch) return true;
        }
        return false;
      };
      break;
  }
  bool hit = true;
  if (reached) {
    // Stop right after the event that reaches the cut, before the scheduler
    // reacts to it.
    hit = false;
    while (!(hit = reached())) {
      if (!eng.step_event()) break;
      if ((hit = reached())) break;
      eng.finish_batch();
    }
  }
  CrashSnapshot snap = snapshot(eng);
  snap.reached = hit;
  if (plan.mode == CrashMode::omission && hit) apply_omission(eng, snap, plan);
  eng.crash_flush();
  return snap;
}

RecoveryReport recover(const SimConfig& config, const std::vector<TraceEvent>& trace,
                       const CrashSnapshot& snap) {
  const KeySet keys = KeySet::from_seed(config.seed);
  GoldenMemory golden;
  {
    EpochId ep = 0;
    for (const auto& ev : trace) {
      if (ev.is_store()) {
        golden.apply_store(ev.addr, payload_for(ev.payload_seed), ep);
      } else {
        ++ep;
      }
    }
  }
  const auto& log = golden.log();

  RecoveryReport rep;
  rep.scheme = snap.scheme;
  rep.crash_cycle = snap.cycle;

  DurableImage img = snap.state.nvmm;
  for (const auto& w : snap.state.wpq) apply_entry(img, w);
  rep.root_register = snap.state.root_register;
  rep.rebuilt_root = BmtState::rebuild_root(config.geometry, keys, img.counters);
  rep.bmt_failure = rep.rebuilt_root != rep.root_register;

  std::set<BlockAddr> addrs;
  for (const auto& [a, _] : img.ciphertext) addrs.insert(a);
  for (const auto& [a, _] : img.macs) addrs.insert(a);

  const bool epochs = is_epoch_scheme(snap.scheme);

  // Reference state: the durable prefix (strict) or the retired epochs.
  std::map<BlockAddr, Block> expected;
  std::map<std::uint64_t, SplitCounter> expected_counters;
  std::set<BlockAddr> classified;
  std::set<std::uint64_t> classified_pages;
  if (epochs) {
    rep.reference_epoch = snap.last_retired_epoch;
    auto committed = [&](EpochId e) { return snap.last_retired_epoch && e <= *snap.last_retired_epoch; };
    for (const auto& p : log) {
      if (!committed(p.epoch)) continue;
      expected[p.addr] = p.plaintext;
      expected_counters[p.addr.page()].bump(p.addr.block_in_page());
    }
    for (PersistId id : snap.durable_persists) {
      if (id >= log.size() || committed(log[id].epoch)) continue;
      rep.in_flight_epochs.insert(log[id].epoch);
      classified.insert(log[id].addr);
    }
    // A durable counter whose major moved past the committed one was
    // overflowed by an in-flight persist: the whole page was re-encrypted.
    for (const auto& [page, ctr] : img.counters) {
      auto it = expected_counters.find(page);
      const std::uint64_t major = it == expected_counters.end() ? 0 : it->second.major();
      if (ctr.major() != major && !rep.in_flight_epochs.empty()) classified_pages.insert(page);
    }
  } else {
    expected = golden.state_after(snap.completed_persists);
  }
  auto is_classified = [&](BlockAddr a) { return classified.count(a) != 0 || classified_pages.count(a.page()) != 0; };

  std::ostringstream why;
  auto fail = [&](const std::string& msg) {
    if (why.tellp() == 0) why << msg;
  };

  for (BlockAddr a : addrs) {
    BlockVerdict v;
    v.addr = a;
    auto ct_it = img.ciphertext.find(a);
    const Block ct = ct_it == img.ciphertext.end() ? Block{} : ct_it->second;
    auto ctr_it = img.counters.find(a.page());
    const SplitCounter ctr = ctr_it == img.counters.end() ? SplitCounter{} : ctr_it->second;
    const EffectiveCounter eff = ctr.effective(a.block_in_page());
    auto mac_it = img.macs.find(a);
    v.mac_failure = mac_it == img.macs.end() || !verify_mac(ct, a, eff, mac_it->second, keys);
    v.recovered = decrypt(ct, a, eff, keys);
    v.incomplete_epoch = epochs && is_classified(a);
    auto exp = expected.find(a);
    v.wrong_plaintext = exp == expected.end() || exp->second != v.recovered;
    rep.recovered[a] = v.recovered;
    rep.mac_failures += v.mac_failure ? 1 : 0;
    rep.wrong_plaintext += v.wrong_plaintext ? 1 : 0;
    rep.incomplete_epoch_blocks += v.incomplete_epoch ? 1 : 0;
    rep.blocks.push_back(v);
  }

  if (!epochs) {
    // Every persist-count prefix whose plaintext state equals the recovered
    // one, found by tracking the number of differing blocks incrementally.
    std::map<BlockAddr, Block> g;
    auto differs = [&](BlockAddr a) {
      auto r = rep.recovered.find(a);
      auto x = g.find(a);
      if (r == rep.recovered.end() || x == g.end()) return (r == rep.recovered.end()) != (x == g.end());
      return r->second != x->second;
    };
    std::size_t diff = rep.recovered.size();
    if (diff == 0) rep.matching_prefixes.push_back(0);
    for (std::size_t k = 0; k < log.size(); ++k) {
      const BlockAddr a = log[k].addr;
      const bool before = differs(a);
      g[a] = log[k].plaintext;
      const bool after = differs(a);
      diff = diff - (before ? 1 : 0) + (after ? 1 : 0);
      if (diff == 0) rep.matching_prefixes.push_back(k + 1);
    }
    if (rep.bmt_failure) fail("root register does not match the durable counters");
    if (rep.mac_failures > 0) fail(std::to_string(rep.mac_failures) + " block(s) failed MAC verification");
    if (rep.matching_prefixes.empty()) fail("recovered memory matches no persist-order prefix");
    rep.consistent = !rep.bmt_failure && rep.mac_failures == 0 && !rep.matching_prefixes.empty();
    bool at_cut = false;
    for (auto k : rep.matching_prefixes) at_cut |= k == snap.completed_persists;
    rep.exact = rep.consistent && at_cut;
    if (rep.consistent && !at_cut) fail("recovered prefix differs from the durable persist count");
  } else {
    for (const auto& v : rep.blocks) {
      if (v.incomplete_epoch) continue;
      if (v.mac_failure) fail("block " + to_hex(v.addr) + " failed MAC verification");
      if (v.wrong_plaintext) fail("block " + to_hex(v.addr) + " differs from the committed epoch state");
    }
    for (const auto& [a, _] : expected) {
      if (!is_classified(a) && img.ciphertext.count(a) == 0) fail("block " + to_hex(a) + " of a committed epoch is missing");
    }
    if (rep.bmt_failure && rep.in_flight_epochs.empty()) {
      fail("root register does not match the durable counters and no epoch was in flight");
    }
    rep.consistent = why.tellp() == 0;
    rep.exact = rep.consistent && rep.in_flight_epochs.empty() && !rep.bmt_failure;
  }
  rep.reason = why.str();
  return rep;
}

std::set<std::string> block_verdict(const RecoveryReport& r, BlockAddr addr, const Block& written) {
  std::set<std::string> out;
  if (r.bmt_failure) out.insert("bmt_failure");
  for (const auto& v : r.blocks) {
    if (v.addr != addr) continue;
    if (v.mac_failure) out.insert("mac_failure");
    if (v.recovered != written) out.insert("wrong_plaintext");
    return out;
  }
  // Nothing durable at all for the block reads back as zeros.
  out.insert("wrong_plaintext");
  return out;
}

std::vector<OmissionRow> omission_matrix(const SimConfig& config) {
  // Eight stores to distinct pages; the fourth one loses a component. It is
  // fenced into an epoch of its own so the cut leaves no other persist half
  // done under epoch schemes.
  std::vector<TraceEvent> trace;
  for (std::uint64_t i = 0; i < 8; ++i) {
    if (i == 3 || i == 4) trace.push_back(TraceEvent::fence());
    trace.push_back(TraceEvent::store(BlockAddr::from(i * 3 * kPageBytes + 5 * kBlockBytes), i));
  }
  const PersistId victim = 3;
  const TraceEvent& victim_store = trace[4];
  const std::vector<std::pair<Component, std::set<std::string>>> table = {
      {Component::root, {"bmt_failure"}},
      {Component::mac, {"mac_failure"}},
      {Component::counter, {"wrong_plaintext", "bmt_failure", "mac_failure"}},
      {Component::ciphertext, {"wrong_plaintext", "mac_failure"}},
  };
  std::vector<OmissionRow> rows;
  for (const auto& [c, expected] : table) {
    CrashPlan plan;
    plan.mode = CrashMode::omission;
    plan.persist = victim;
    plan.omit = c;
    const CrashSnapshot snap = crash(config, trace, plan);
    const RecoveryReport rep = recover(config, trace, snap);
    OmissionRow row;
    row.omitted = c;
    row.expected = expected;
    row.observed = block_verdict(rep, victim_store.addr, payload_for(victim_store.payload_seed));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace plp
