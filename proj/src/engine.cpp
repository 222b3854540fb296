#include "plpsim/engine.hpp"

#include <algorithm>
#include <sstream>

namespace plp {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::sequential: return "sequential";
    case Scheme::pipeline: return "pipeline";
    case Scheme::ooo: return "ooo";
    case Scheme::coalesce: return "coalesce";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "sequential" || name == "sp") return Scheme::sequential;
  if (name == "pipeline") return Scheme::pipeline;
  if (name == "ooo" || name == "o3") return Scheme::ooo;
  if (name == "coalesce" || name == "coalescing") return Scheme::coalesce;
  throw InputError("unknown scheme '" + name + "' (sequential, pipeline, ooo, coalesce)");
}

const char* to_string(Component c) {
  switch (c) {
    case Component::ciphertext: return "C";
    case Component::counter: return "gamma";
    case Component::mac: return "M";
    case Component::root: return "R";
  }
  return "?";
}

void SimConfig::validate() const {
  counter_cache.validate("counter cache");
  mac_cache.validate("mac cache");
  bmt_cache.validate("bmt cache");
  if (engine.wpq_capacity == 0) throw InputError("wpq capacity must be positive");
  if (engine.ptt_capacity == 0) throw InputError("ptt capacity must be positive");
  if (engine.ett_capacity == 0) throw InputError("ett capacity must be positive");
  if (engine.mac_units == 0) throw InputError("mac units must be positive");
  if (latency.drain_interval == 0) throw InputError("drain interval must be positive");
}

void SimConfig::set_ideal_caches(bool ideal) {
  counter_cache.ideal = ideal;
  mac_cache.ideal = ideal;
  bmt_cache.ideal = ideal;
}

bool WpqEntry::has(Component c) const {
  switch (c) {
    case Component::ciphertext: return ciphertext_arrived;
    case Component::counter: return counter_arrived;
    case Component::mac: return mac_arrived;
    case Component::root: return root_done;
  }
  return false;
}

namespace {

constexpr std::uint8_t bit(Component c) { return std::uint8_t(1u << unsigned(c)); }
constexpr std::uint8_t kTupleBits = bit(Component::ciphertext) | bit(Component::counter) | bit(Component::mac);
constexpr std::uint8_t kAllBits = kTupleBits | bit(Component::root);

// Strict persistency runs the metadata caches write-through.
SimConfig prepared(SimConfig c) {
  c.validate();
  if (!is_epoch_scheme(c.engine.scheme)) {
    c.counter_cache.write_through = true;
    c.mac_cache.write_through = true;
    c.bmt_cache.write_through = true;
  }
  return c;
}

}  // namespace

Engine::Engine(SimConfig config, std::vector<TraceEvent> trace)
    : config_(prepared(std::move(config))),
      keys_(KeySet::from_seed(config_.seed)),
      trace_(std::move(trace)),
      tree_(config_.geometry, keys_),
      caches_(config_.counter_cache, config_.mac_cache, config_.bmt_cache) {
  for (const auto& ev : trace_) {
    if (ev.is_store()) config_.geometry.leaf_for_page(ev.addr.page());
  }
  ptt_.resize(config_.engine.ptt_capacity);
  mac_free_.assign(config_.geometry.levels() + 1, std::vector<Cycle>(config_.engine.mac_units, 0));
}

// ---------------------------------------------------------------------------
// Event loop

bool Engine::step() {
  if (!step_event()) return false;
  finish_batch();
  return true;
}

bool Engine::step_event() {
  if (!primed_) {
    primed_ = true;
    return true;
  }
  if (events_.empty()) return false;
  const Event ev = events_.pop();
  now_ = ev.cycle;
  handle(ev);
  return true;
}

void Engine::finish_batch() {
  if (events_.empty() || events_.top().cycle > now_) schedule_pass();
}

void Engine::run_until_idle() {
  while (step()) {
  }
  if (!done()) {
    std::ostringstream os;
    os << "deadlock at cycle " << now_ << ": " << (trace_.size() - cursor_) << " trace events left, "
       << ptt_count_ << " PTT entries, " << wpq_.size() << " WPQ entries, " << ett_.size()
       << " active epochs";
    throw DeadlockError(os.str());
  }
}

void Engine::run_before(Cycle cycle) {
  if (!primed_ && cycle > 0) step();
  while (!events_.empty() && events_.top().cycle < cycle) step();
}

bool Engine::done() const {
  return primed_ && cursor_ >= trace_.size() && ptt_count_ == 0 && wpq_.empty() && ett_.empty();
}

std::optional<Cycle> Engine::next_event_cycle() const {
  if (events_.empty()) return std::nullopt;
  return events_.top().cycle;
}

void Engine::handle(const Event& ev) {
  switch (ev.kind) {
    case EventKind::epoch_retire: on_epoch_retire(ev.a); break;
    case EventKind::mac_done: on_mac_done(ev.a, ev.b); break;
    case EventKind::fill_done: {
      PttEntry& e = slot(ev.a);
      if (e.valid && e.phase == PttPhase::fetching && e.pending_node == ev.b) e.phase = PttPhase::waiting;
      break;
    }
    case EventKind::tuple_arrived: on_tuple_arrived(ev.a, Component(ev.b)); break;
    case EventKind::drain: on_drain(); break;
    case EventKind::wake: wakes_.erase(ev.cycle); break;
  }
}

void Engine::schedule_pass() {
  // Each pass either changes state or stops; the bound guards against bugs.
  for (int i = 0; i < 1 << 20; ++i) {
    if (!pass_once()) return;
  }
  throw std::logic_error("scheduler pass did not converge");
}

bool Engine::pass_once() {
  bool changed = update_locks();
  changed |= submit_from_core();
  switch (config_.engine.scheme) {
    case Scheme::sequential: changed |= sequential_pass(); break;
    case Scheme::pipeline: changed |= pipeline_pass(); break;
    case Scheme::ooo:
    case Scheme::coalesce: changed |= ooo_pass(); break;
  }
  changed |= pop_ptt();
  changed |= check_epoch_retire();
  changed |= try_drain();
  if (is_epoch_scheme(config_.engine.scheme)) refresh_ett_levels();
  return changed;
}

void Engine::wake_at(Cycle c) {
  if (c <= now_) return;
  if (wakes_.insert(c).second) events_.push(c, EventKind::wake);
}

// ---------------------------------------------------------------------------
// Core and submission

bool Engine::submit_from_core() {
  bool any = false;
  const bool epochs = is_epoch_scheme(config_.engine.scheme);
  while (cursor_ < trace_.size()) {
    const TraceEvent& ev = trace_[cursor_];
    if (!ev.is_store()) {
      if (stores_in_core_epoch_ == 0) {
        epoch_log_.push_back({core_epoch_, now_, log_seq_++, 0});
        ++stats_.epochs_retired;
      }
      ++core_epoch_;
      stores_in_core_epoch_ = 0;
      last_in_epoch_.reset();
      ++cursor_;
      any = true;
      continue;
    }
    if (now_ < next_submit_) {
      wake_at(next_submit_);
      break;
    }
    int cause = -1;
    if (wpq_.size() >= config_.engine.wpq_capacity) {
      cause = 0;
    } else if (ptt_count_ >= ptt_.size()) {
      cause = 1;
    } else if (epochs && ett_find(core_epoch_) == nullptr && ett_.size() >= config_.engine.ett_capacity) {
      cause = 2;
    }
    if (cause >= 0) {
      if (!stall_since_) {
        stall_since_ = now_;
        stall_cause_ = cause;
      }
      break;
    }
    end_stall();
    submit_store(ev);
    ++cursor_;
    any = true;
    next_submit_ = now_ + std::max<Cycle>(config_.latency.wpq_enqueue, 1);
  }
  return any;
}

void Engine::end_stall() {
  if (!stall_since_) return;
  const Cycle d = now_ - *stall_since_;
  switch (stall_cause_) {
    case 0: stats_.stalls.wpq_full += d; break;
    case 1: stats_.stalls.ptt_full += d; break;
    default: stats_.stalls.ett_full += d; break;
  }
  stall_since_.reset();
  stall_cause_ = -1;
}

void Engine::submit_store(const TraceEvent& ev) {
  const bool epochs = is_epoch_scheme(config_.engine.scheme);
  const auto& lat = config_.latency;
  const PersistId id = records_.size();
  const BlockAddr addr = ev.addr;
  const std::uint64_t page = addr.page();
  const Label leaf = config_.geometry.leaf_for_page(page);

  // Metadata lookups. A counter miss also verifies the fetched block.
  const Cycle ctr_lat = metadata_access(caches_.counter, counter_fills_, page, lat.mac) - now_;
  const Cycle mac_lat = metadata_access(caches_.mac, mac_fills_, addr.value() / (kBlockBytes * 8), 0) - now_;

  // Functional effect of the store.
  const Block plain = payload_for(ev.payload_seed);
  SplitCounter& ctr = counters_[page];
  const bool overflow = ctr.bump(addr.block_in_page());
  plain_view_[addr.value()] = plain;

  if (epochs && ett_find(core_epoch_) == nullptr) {
    EttEntry t;
    t.eid = core_epoch_;
    t.valid = true;
    t.level = config_.geometry.levels();
    t.start = ptt_index(ptt_count_);
    ett_.push_back(t);
  }

  WpqEntry w;
  w.persist = id;
  w.epoch = core_epoch_;
  w.addr = addr;
  w.page = page;
  w.counter = ctr;
  w.locked = epochs ? ett_.front().eid != core_epoch_ : true;
  auto write_block = [&](BlockAddr a, const Block& p) {
    const EffectiveCounter eff = ctr.effective(a.block_in_page());
    TupleWrite t{a, encrypt(p, a, eff, keys_), 0};
    t.mac = mac(t.ciphertext, a, eff, keys_);
    w.blocks.push_back(t);
  };
  write_block(addr, plain);
  if (overflow) {
    ++stats_.counter_overflows;
    for (std::size_t b = 0; b < kBlocksPerPage; ++b) {
      if (b == addr.block_in_page()) continue;
      const auto sib = BlockAddr::from(page * kPageBytes + b * kBlockBytes);
      auto it = plain_view_.find(sib.value());
      if (it != plain_view_.end()) write_block(sib, it->second);
    }
  }
  wpq_.push_back(std::move(w));

  counter_history_[page].push_back({epochs ? core_epoch_ : id, ctr});

  const Cycle enq = lat.wpq_enqueue;
  events_.push(now_ + enq, EventKind::tuple_arrived, id, unsigned(Component::ciphertext));
  events_.push(now_ + ctr_lat + enq, EventKind::tuple_arrived, id, unsigned(Component::counter));
  events_.push(now_ + std::max(ctr_lat, mac_lat) + enq, EventKind::tuple_arrived, id,
               unsigned(Component::mac));

  const std::size_t s = ptt_index(ptt_count_);
  ++ptt_count_;
  PttEntry e;
  e.valid = true;
  e.level = config_.geometry.levels();
  e.pending_node = leaf;
  e.persist = id;
  e.epoch = core_epoch_;
  e.ready_at = now_ + ctr_lat;
  ptt_[s] = e;
  slot_of_[id] = s;

  if (epochs) {
    EttEntry* t = ett_find(core_epoch_);
    t->end = s;
    ++t->members;
  }

  PersistRecord r;
  r.id = id;
  r.epoch = core_epoch_;
  r.addr = addr;
  r.leaf = leaf;
  r.submit = now_;
  records_.push_back(r);
  ++stats_.persists_submitted;
  ++stores_in_core_epoch_;

  if (config_.engine.scheme == Scheme::coalesce && last_in_epoch_) plan_coalesce(*last_in_epoch_, s);
  last_in_epoch_ = id;
  wake_at(ptt_[s].ready_at);
}

void Engine::plan_coalesce(PersistId prev, std::size_t new_slot) {
  auto found = slot_of_.find(prev);
  if (found == slot_of_.end()) return;
  PttEntry& p = slot(found->second);
  PttEntry& n = slot(new_slot);
  if (!p.valid || p.persisted || p.epoch != n.epoch || p.stop_at) return;
  if (p.phase == PttPhase::stopped || p.phase == PttPhase::finished) return;

  const auto& g = config_.geometry;
  Label s = g.lca(records_[prev].leaf, records_[n.persist].leaf);
  unsigned ls = g.level_of(s);
  const bool unissued = p.phase == PttPhase::waiting || p.phase == PttPhase::fetching;
  const bool before_s = p.level > ls || (p.level == ls && unissued);
  if (!before_s) {
    // Already past the LCA: merge at the first node the leading persist has
    // not issued yet. The trailing one redoes the levels in between.
    if (!p.started) return;
    if (unissued) {
      s = p.pending_node;
    } else {
      if (p.level <= 1) return;
      s = g.parent(p.pending_node);
    }
    ls = g.level_of(s);
  }

  p.stop_at = s;
  // Waits on nodes at or above S now belong to the trailing persist.
  auto keep = std::stable_partition(p.waits.begin(), p.waits.end(),
                                    [&](const auto& w) { return g.level_of(w.first) > ls; });
  n.waits.insert(n.waits.end(), keep, p.waits.end());
  p.waits.erase(keep, p.waits.end());
  n.waits.emplace_back(s, prev);
  records_[prev].coalesced_leading = true;
  ++stats_.coalesces;
  if (p.level == ls) {
    p.phase = PttPhase::stopped;
    p.ready = true;
  }
}

// ---------------------------------------------------------------------------
// Schedulers

bool Engine::sequential_pass() {
  if (ptt_count_ == 0) return false;
  const std::size_t h = ptt_head_;
  if (slot(h).phase != PttPhase::waiting) return false;
  return try_issue(h);
}

bool Engine::pipeline_pass() {
  bool changed = false;
  bool in_progress = false;
  std::vector<std::size_t> members;
  for (PersistId id : wave_) {
    auto it = slot_of_.find(id);
    if (it == slot_of_.end() || slot(it->second).persisted) continue;
    members.push_back(it->second);
  }
  for (std::size_t idx : members) {
    PttEntry& e = slot(idx);
    if (e.ready) continue;
    in_progress = true;
    if (e.phase == PttPhase::waiting) changed |= try_issue(idx);
  }
  if (in_progress) return changed;

  std::vector<std::size_t> next;
  for (std::size_t idx : members) {
    advance(slot(idx));
    next.push_back(idx);
  }
  for (std::size_t off = 0; off < ptt_count_; ++off) {
    const std::size_t idx = ptt_index(off);
    PttEntry& e = slot(idx);
    if (!e.valid || e.started) continue;
    if (e.ready_at <= now_) {
      e.started = true;
      next.push_back(idx);
    } else {
      wake_at(e.ready_at);
    }
    break;
  }
  if (next.empty()) {
    const bool had = !wave_.empty();
    wave_.clear();
    return changed || had;
  }
  // Every member reads the tree as it stood at wave start.
  wave_.clear();
  for (std::size_t idx : next) {
    PttEntry& e = slot(idx);
    e.staged_value = compute_update(e);
    e.staged = true;
    wave_.push_back(e.persist);
  }
  for (std::size_t idx : next) try_issue(idx);
  return true;
}

bool Engine::ooo_pass() {
  bool changed = false;
  for (std::size_t off = 0; off < ptt_count_; ++off) {
    const std::size_t idx = ptt_index(off);
    PttEntry& e = slot(idx);
    if (!e.valid || e.phase != PttPhase::waiting) continue;
    if (!epoch_gate(e) || !waits_satisfied(e)) continue;
    if (try_issue(idx)) {
      e.started = true;
      changed = true;
    }
  }
  return changed;
}

// An older epoch member may still read any node at or below readable_level;
// a younger epoch may only write strictly above it.
bool Engine::epoch_gate(const PttEntry& e) const {
  for (std::size_t off = 0; off < ptt_count_; ++off) {
    const PttEntry& o = ptt_[ptt_index(off)];
    if (o.epoch >= e.epoch) break;
    if (!o.valid || o.persisted) continue;
    if (readable_level(o) >= e.level) return false;
  }
  return true;
}

unsigned Engine::readable_level(const PttEntry& e) const {
  switch (e.phase) {
    case PttPhase::waiting:
    case PttPhase::fetching: return e.level + 1;
    case PttPhase::issued: return e.level;
    default: return 0;
  }
}

bool Engine::waits_satisfied(const PttEntry& e) const {
  for (const auto& [node, lead] : e.waits) {
    if (node != e.pending_node) continue;
    auto it = slot_of_.find(lead);
    if (it == slot_of_.end()) continue;
    const PttEntry& l = ptt_[it->second];
    if (l.phase != PttPhase::stopped && l.phase != PttPhase::finished) return false;
  }
  return true;
}

// Root writes must not run ahead of older, still incomplete persists (strict)
// or epochs (epoch persistency), nor of the persist's own tuple (strict).
bool Engine::older_incomplete(const PttEntry& e) const {
  if (is_epoch_scheme(config_.engine.scheme)) return !ett_.empty() && ett_.front().eid < e.epoch;
  if ((records_[e.persist].components & kTupleBits) != kTupleBits) return true;
  for (std::size_t off = 0; off < ptt_count_; ++off) {
    const PttEntry& o = ptt_[ptt_index(off)];
    if (o.persist >= e.persist) break;
    if (!records_[o.persist].complete) return true;
  }
  return false;
}

Cycle Engine::metadata_access(SetAssocCache& cache, std::unordered_map<std::uint64_t, Cycle>& fills,
                              std::uint64_t key, Cycle verify) {
  const AccessResult r = cache.access(key, Intent::write);
  if (!r.hit) {
    const Cycle ready = now_ + r.latency + verify;
    if (!cache.config().ideal) fills[key] = ready;
    return ready;
  }
  Cycle ready = now_ + r.latency;
  auto it = fills.find(key);
  if (it != fills.end()) {
    if (it->second > ready) {
      ready = it->second;
    } else {
      fills.erase(it);
    }
  }
  return ready;
}

bool Engine::try_issue(std::size_t i) {
  PttEntry& e = slot(i);
  if (e.phase != PttPhase::waiting) return false;
  if (e.ready_at > now_) {
    wake_at(e.ready_at);
    return false;
  }
  if (!e.looked_up) {
    e.looked_up = true;
    if (e.level > 1) {
      // Hits overlap with the MAC. A miss fills, then verifies the fetched
      // node; later lookups of the same node wait for that fill.
      const bool hit = caches_.bmt.contains(e.pending_node);
      const Cycle ready = metadata_access(caches_.bmt, bmt_fills_, e.pending_node, config_.latency.mac);
      if (!hit || ready > now_ + config_.latency.cache_hit) {
        e.phase = PttPhase::fetching;
        e.ready_at = ready;
        events_.push(e.ready_at, EventKind::fill_done, i, e.pending_node);
        return true;
      }
    }
  }
  if (e.level == 1 && older_incomplete(e)) return false;

  auto& units = mac_free_[e.level];
  auto unit = std::min_element(units.begin(), units.end());
  if (*unit > now_) {
    wake_at(*unit);
    return false;
  }
  const Cycle mac_lat = config_.latency.mac;
  *unit = now_ + (config_.engine.pipelined_mac() ? std::min<Cycle>(1, mac_lat) : mac_lat);

  e.staged_value = e.staged ? e.staged_value : compute_update(e);
  e.staged = false;
  e.phase = PttPhase::issued;
  e.ready = false;
  if (e.level == config_.geometry.levels() && !records_[e.persist].leaf_start) {
    records_[e.persist].leaf_start = now_;
  }
  events_.push(now_ + mac_lat, EventKind::mac_done, i, e.pending_node);
  return true;
}

std::uint64_t Engine::order_key(const PttEntry& e) const {
  return is_epoch_scheme(config_.engine.scheme) ? e.epoch : e.persist;
}

Tag Engine::compute_update(const PttEntry& e) const {
  if (e.level < config_.geometry.levels()) return tree_.compute_interior(e.pending_node);
  // The leaf takes the newest counter version visible to this persist.
  const std::uint64_t page = config_.geometry.page_of_leaf(e.pending_node);
  const auto& hist = counter_history_.at(page);
  const std::uint64_t key = order_key(e);
  const CounterVersion* pick = nullptr;
  for (const auto& v : hist) {
    if (v.key <= key) pick = &v;
  }
  return tree_.compute_leaf(pick != nullptr ? pick->counter : SplitCounter{});
}

// ---------------------------------------------------------------------------
// Completion

void Engine::on_mac_done(std::size_t i, Label node) {
  PttEntry& e = slot(i);
  const Tag v = e.staged_value;
  tree_.set(node, v);
  PersistRecord& rec = records_[e.persist];
  if (e.level == 1) {
    rec.root_before = tree_.root_register();
    tree_.set_root_register(v);
    rec.root_after = v;
    rec.updated_root = true;
    ++stats_.root_updates;
  }
  if (config_.engine.record_events) node_log_.push_back({now_, e.persist, e.epoch, node, e.level});
  ++stats_.node_updates;
  e.ready = true;

  std::vector<PersistId> released;
  std::erase_if(e.waits, [&](const auto& w) {
    if (w.first != node) return false;
    released.push_back(w.second);
    return true;
  });
  for (PersistId lead : released) set_persisted(slot_of_.at(lead), e.persist);

  if (e.level == 1) {
    set_persisted(i, e.persist);
    return;
  }
  if (config_.engine.scheme != Scheme::pipeline) advance(e);
}

void Engine::advance(PttEntry& e) {
  const Label parent = config_.geometry.parent(e.pending_node);
  if (e.stop_at && *e.stop_at == parent) {
    e.phase = PttPhase::stopped;
    return;
  }
  --e.level;
  e.pending_node = parent;
  e.ready = false;
  e.phase = PttPhase::waiting;
  e.looked_up = false;
  e.ready_at = std::max(e.ready_at, now_);
}

void Engine::set_persisted(std::size_t i, PersistId writer) {
  PttEntry& e = slot(i);
  if (e.persisted) return;
  e.persisted = true;
  e.ready = true;
  e.phase = PttPhase::finished;
  PersistRecord& rec = records_[e.persist];
  rec.root_done = now_;
  rec.root_writer = writer;
  rec.components |= bit(Component::root);
  if (WpqEntry* w = wpq_find(e.persist)) {
    w->root_done = true;
    if (is_epoch_scheme(config_.engine.scheme) && !w->locked) record_durable(*w, Component::root);
  } else {
    durability_log_.push_back({now_, log_seq_++, e.persist, e.epoch, Component::root});
  }
  if (EttEntry* t = ett_find(e.epoch)) ++t->members_persisted;
  check_complete(e.persist);
}

void Engine::on_tuple_arrived(PersistId id, Component c) {
  PersistRecord& rec = records_[id];
  rec.components |= bit(c);
  WpqEntry* w = wpq_find(id);
  if (w == nullptr) throw std::logic_error("tuple component for a drained entry");
  switch (c) {
    case Component::ciphertext: w->ciphertext_arrived = true; break;
    case Component::counter: w->counter_arrived = true; break;
    case Component::mac: w->mac_arrived = true; break;
    case Component::root: break;
  }
  if (is_epoch_scheme(config_.engine.scheme) && !w->locked) record_durable(*w, c);
  if ((rec.components & kTupleBits) == kTupleBits) {
    if (EttEntry* t = ett_find(rec.epoch)) ++t->members_arrived;
  }
  check_complete(id);
}

void Engine::check_complete(PersistId id) {
  PersistRecord& rec = records_[id];
  if (rec.complete || rec.components != kAllBits) return;
  rec.complete = now_;
  ++stats_.persists_completed;
  if (is_epoch_scheme(config_.engine.scheme)) return;
  // Strict: the whole tuple becomes durable at once.
  WpqEntry* w = wpq_find(id);
  w->state = WpqState::complete;
  w->locked = false;
  for (Component c : {Component::ciphertext, Component::counter, Component::mac, Component::root}) {
    record_durable(*w, c);
  }
  completion_cycle_ = now_;
}

void Engine::record_durable(const WpqEntry& w, Component c) {
  durability_log_.push_back({now_, log_seq_++, w.persist, w.epoch, c});
}

bool Engine::pop_ptt() {
  bool any = false;
  const bool epochs = is_epoch_scheme(config_.engine.scheme);
  while (ptt_count_ > 0) {
    PttEntry& h = ptt_[ptt_head_];
    if (!h.persisted) break;
    if (!epochs && !records_[h.persist].complete) break;
    slot_of_.erase(h.persist);
    h = PttEntry{};
    ptt_head_ = (ptt_head_ + 1) % ptt_.size();
    --ptt_count_;
    any = true;
  }
  return any;
}

bool Engine::update_locks() {
  if (!is_epoch_scheme(config_.engine.scheme)) return false;
  const EpochId pec = pending_epoch();
  bool any = false;
  for (auto& w : wpq_) {
    if (!w.locked || w.epoch != pec) continue;
    w.locked = false;
    any = true;
    for (Component c : {Component::ciphertext, Component::counter, Component::mac, Component::root}) {
      if (w.has(c)) record_durable(w, c);
    }
    if (w.all_arrived() && w.root_done) w.state = WpqState::complete;
  }
  return any;
}

bool Engine::check_epoch_retire() {
  if (ett_.empty()) return false;
  EttEntry& t = ett_.front();
  if (t.ready) return false;
  const bool closed = t.eid < core_epoch_ || cursor_ >= trace_.size();
  if (!closed || t.members_persisted != t.members || t.members_arrived != t.members) return false;
  t.ready = true;
  events_.push(now_, EventKind::epoch_retire, t.eid);
  return true;
}

void Engine::on_epoch_retire(EpochId eid) {
  if (ett_.empty() || ett_.front().eid != eid) throw std::logic_error("epochs must retire in order");
  epoch_log_.push_back({eid, now_, log_seq_++, ett_.front().members});
  ett_.pop_front();
  ++stats_.epochs_retired;
  completion_cycle_ = now_;
}

void Engine::refresh_ett_levels() {
  for (auto& t : ett_) t.level = 0;
  for (std::size_t off = 0; off < ptt_count_; ++off) {
    const PttEntry& e = ptt_[ptt_index(off)];
    if (!e.valid || e.persisted || e.phase == PttPhase::stopped) continue;
    if (EttEntry* t = ett_find(e.epoch)) t->level = std::max(t->level, e.level);
  }
}

// ---------------------------------------------------------------------------
// Drain

bool Engine::try_drain() {
  if (drain_scheduled_ || wpq_.empty()) return false;
  const WpqEntry& h = wpq_.front();
  const bool ok = is_epoch_scheme(config_.engine.scheme) ? (!h.locked && h.all_arrived())
                                                         : h.state == WpqState::complete;
  if (!ok) return false;
  events_.push(std::max(now_, drain_free_at_), EventKind::drain);
  drain_scheduled_ = true;
  return true;
}

void Engine::on_drain() {
  drain_scheduled_ = false;
  WpqEntry& h = wpq_.front();
  for (const auto& b : h.blocks) {
    nvmm_.ciphertext[b.addr] = b.ciphertext;
    nvmm_.macs[b.addr] = b.mac;
  }
  nvmm_.counters[h.page] = h.counter;
  records_[h.persist].drained = now_;
  if (config_.engine.record_events) drain_log_.push_back(h);
  wpq_.pop_front();
  drain_free_at_ = now_ + config_.latency.drain_interval;
  last_drain_cycle_ = now_;
  ++stats_.drains;
}

// ---------------------------------------------------------------------------
// Introspection

std::optional<Cycle> Engine::leaf_start_offset() const {
  for (const auto& r : records_) {
    if (r.leaf_start) return *r.leaf_start - r.submit;
  }
  return std::nullopt;
}

DurableState Engine::durable_state() const {
  DurableState d;
  d.nvmm = nvmm_;
  d.root_register = tree_.root_register();
  d.nvmm.root_register = d.root_register;
  d.cycle = now_;
  const bool epochs = is_epoch_scheme(config_.engine.scheme);
  for (const auto& w : wpq_) {
    if (epochs ? !w.locked : w.state == WpqState::complete) d.wpq.push_back(w);
  }
  return d;
}

void Engine::crash_flush() {
  caches_.flush_volatile();
  tree_.drop_volatile();
}

std::vector<PttEntry> Engine::ptt_entries() const {
  std::vector<PttEntry> out;
  for (std::size_t off = 0; off < ptt_count_; ++off) out.push_back(ptt_[ptt_index(off)]);
  return out;
}

EpochId Engine::pending_epoch() const { return ett_.empty() ? core_epoch_ : ett_.front().eid; }

WpqEntry* Engine::wpq_find(PersistId id) {
  for (auto& w : wpq_) {
    if (w.persist == id) return &w;
  }
  return nullptr;
}

EttEntry* Engine::ett_find(EpochId eid) {
  for (auto& t : ett_) {
    if (t.eid == eid) return &t;
  }
  return nullptr;
}

}  // namespace plp
