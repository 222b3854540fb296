// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "plpsim/config.hpp"
#include "plpsim/crash.hpp"
#include "plpsim/report.hpp"
#include "plpsim/sim.hpp"

using namespace plp;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

constexpr Scheme kSchemes[] = {Scheme::sequential, Scheme::pipeline, Scheme::ooo, Scheme::coalesce};

SimConfig ideal(Scheme s, unsigned arity = 8, unsigned levels = 9, Cycle mac = 40) {
  SimConfig c;
  c.engine.scheme = s;
  c.geometry = BmtGeometry(arity, levels);
  c.latency.mac = mac;
  c.set_ideal_caches(true);
  return c;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Critical path of a single all-hit persist, leaf start to root update.
Verdict ac1() {
  Verdict v;
  for (auto [levels, mac, want] : {std::tuple{12u, Cycle{80}, Cycle{960}}, std::tuple{9u, Cycle{40}, Cycle{360}}}) {
    Engine e(ideal(Scheme::sequential, 8, levels, mac), distinct_page_trace(4));
    e.run_until_idle();
    const auto paths = critical_paths(e);
    const bool ok = paths.size() == 4 && std::all_of(paths.begin(), paths.end(), [&](Cycle c) { return c == want; });
    v.pass &= ok;
    v.detail += fmt("levels=%u mac=%llu path=%llu (offset %llu); ", levels, (unsigned long long)mac,
                    (unsigned long long)(paths.empty() ? 0 : paths[0]),
                    (unsigned long long)e.leaf_start_offset().value_or(0));
  }
  return v;
}

Verdict ac2() {
  const auto trace = distinct_page_trace(100);
  const auto pipe = simulate(ideal(Scheme::pipeline), trace);
  const auto seq = simulate(ideal(Scheme::sequential), trace);
  const Cycle gap = median_gap(pipe.completions);
  const Cycle seq_gap = median_gap(seq.completions);
  const Cycle offset = pipe.leaf_start_offset.value_or(0);
  const Cycle ideal_total = (9 + 99) * 40;
  const Cycle total = pipe.total_cycles - offset;
  const double speedup = double(seq_gap) / double(gap);
  const double total_ratio = double(seq.total_cycles) / double(pipe.total_cycles);
  Verdict v;
  v.pass = gap == 40 && (total > ideal_total ? total - ideal_total : ideal_total - total) <= 40 &&
           std::abs(speedup - 9.0) <= 0.45;
  v.detail = fmt("gap=%llu total=%llu (expected %llu) steady-state speedup=%.3f total-cycle ratio=%.3f",
                 (unsigned long long)gap, (unsigned long long)total, (unsigned long long)ideal_total, speedup,
                 total_ratio);
  return v;
}

Verdict ac3() {
  const auto r = simulate(ideal(Scheme::ooo), distinct_page_trace(100));
  const Cycle gap = median_gap(r.completions);
  Verdict v;
  v.pass = gap <= 2 && r.epochs == 1;
  v.detail = fmt("gap=%llu total=%llu", (unsigned long long)gap, (unsigned long long)r.total_cycles);
  return v;
}

Verdict ac4() {
  std::vector<TraceEvent> t;
  for (std::uint64_t p : {0u, 1u, 2u}) t.push_back(TraceEvent::store(BlockAddr::from(p * kPageBytes), p));
  const auto co = simulate(ideal(Scheme::coalesce, 2, 4), t);
  const auto oo = simulate(ideal(Scheme::ooo, 2, 4), t);
  const auto want = oracle::dedup_update_count({0, 1, 2}, 2, 4);
  Verdict v;
  v.pass = co.stats.node_updates == 7 && oo.stats.node_updates == 12 && want == 7 && co.final_root == oo.final_root;
  v.detail = fmt("coalesced=%llu uncoalesced=%llu oracle=%zu reduction=%.1f%%",
                 (unsigned long long)co.stats.node_updates, (unsigned long long)oo.stats.node_updates, want,
                 100.0 * (1.0 - double(co.stats.node_updates) / double(oo.stats.node_updates)));
  return v;
}

Verdict ac5() {
  std::mt19937_64 rng(5);
  std::size_t mismatches = 0, runs = 0;
  const std::size_t traces = 1000;
  for (std::size_t i = 0; i < traces; ++i) {
    const unsigned levels = 2 + unsigned(rng() % 3);
    const unsigned arity = std::array{2u, 4u, 8u}[rng() % 3];
    GenSpec g;
    g.stores = 4 + rng() % 28;
    g.pages = 1 + rng() % std::min<std::uint64_t>(32, BmtGeometry(arity, levels).leaf_count());
    g.run_length = 1 + rng() % 4;
    g.fence_interval = 0;
    g.seed = rng();
    auto trace = generate(g);
    std::optional<Tag> root;
    for (int perm = 0; perm <= 10; ++perm) {
      if (perm > 0) std::shuffle(trace.begin(), trace.end(), rng);
      for (Scheme s : kSchemes) {
        SimConfig c;
        c.engine.scheme = s;
        c.geometry = BmtGeometry(arity, levels);
        const Tag r = simulate(c, trace).final_root;
        ++runs;
        if (!root) root = r;
        mismatches += r != *root ? 1 : 0;
      }
    }
  }
  Verdict v;
  v.pass = mismatches == 0;
  v.detail = fmt("%zu traces, %zu runs, %zu mismatches", traces, runs, mismatches);
  return v;
}

Verdict ac6() {
  Verdict v;
  std::size_t exact = 0, total = 0;
  for (Scheme s : kSchemes) {
    for (const auto& row : omission_matrix(ideal(s))) {
      ++total;
      exact += row.match() ? 1 : 0;
    }
  }
  v.pass = exact == total;
  v.detail = fmt("%zu/%zu rows exact over all schemes", exact, total);
  return v;
}

Verdict ac7() {
  std::size_t points = 0, violations = 0;
  for (Scheme s : {Scheme::sequential, Scheme::pipeline}) {
    for (std::uint64_t t = 0; t < 20; ++t) {
      SimConfig c;
      c.engine.scheme = s;
      c.geometry = BmtGeometry(8, 4);
      GenSpec g;
      g.stores = 60;
      g.pages = 24;
      g.run_length = 1 + t % 4;
      g.fence_interval = 0;
      g.seed = 100 + t;
      const auto trace = generate(g);
      std::vector<std::pair<BlockAddr, Block>> log;
      for (const auto& ev : trace) log.emplace_back(ev.addr, payload_for(ev.payload_seed));
      const auto full = simulate(c, trace);
      std::mt19937_64 rng(t);
      std::uniform_int_distribution<Cycle> pick(0, full.drain_cycles + 1);
      for (int i = 0; i < 50; ++i) {
        CrashPlan p;
        p.cycle = pick(rng);
        const auto rep = recover(c, trace, crash(c, trace, p));
        ++points;
        bool prefix = false;
        for (std::size_t k = 0; k <= log.size() && !prefix; ++k) prefix = oracle::replay_prefix(log, k) == rep.recovered;
        if (!prefix || rep.detected()) ++violations;
      }
    }
  }
  Verdict v;
  v.pass = violations == 0 && points >= 1000;
  v.detail = fmt("%zu crash points (sequential and pipeline, 20 traces each), %zu violations", points, violations);
  return v;
}

Verdict ac8() {
  std::size_t order_violations = 0, boundary_violations = 0, boundaries = 0;
  for (Scheme s : {Scheme::ooo, Scheme::coalesce}) {
    for (std::uint64_t t = 0; t < 100; ++t) {
      SimConfig c;
      c.engine.scheme = s;
      c.geometry = BmtGeometry(8, 4);
      GenSpec g;
      g.stores = 48;
      g.pages = 16;
      g.run_length = 1 + t % 3;
      g.fence_interval = 2 + t % 7;
      g.seed = 200 + t;
      const auto trace = generate(g);
      Engine e(c, trace);
      e.run_until_idle();
      std::map<EpochId, std::uint64_t> retire_seq;
      for (const auto& r : e.epoch_log()) retire_seq[r.epoch] = r.seq;
      for (const auto& d : e.durability_log()) {
        for (const auto& [eid, seq] : retire_seq) {
          if (eid < d.epoch && seq > d.seq) ++order_violations;
        }
      }
      for (const auto& [eid, _] : retire_seq) {
        CrashPlan p;
        p.mode = CrashMode::epoch_boundary;
        p.epoch = eid;
        const auto snap = crash(c, trace, p);
        const auto rep = recover(c, trace, snap);
        ++boundaries;
        if (!snap.reached || !rep.exact || rep.reference_epoch != eid) ++boundary_violations;
      }
    }
  }
  Verdict v;
  v.pass = order_violations == 0 && boundary_violations == 0;
  v.detail = fmt("200 traces, %zu ordering violations, %zu/%zu boundary crashes inexact", order_violations,
                 boundary_violations, boundaries);
  return v;
}

void epoch_pages(const std::vector<TraceEvent>& trace, std::vector<std::vector<std::uint64_t>>& out) {
  out.assign(1, {});
  for (const auto& ev : trace) {
    if (ev.is_store()) {
      out.back().push_back(ev.addr.page());
    } else {
      out.emplace_back();
    }
  }
}

Verdict ac9() {
  GenSpec g;
  g.stores = 2048;
  g.pages = 4096;
  g.run_length = 64;
  g.fence_interval = 32;
  const auto trace = generate(g);
  std::map<Scheme, RunResult> r;
  for (Scheme s : kSchemes) {
    SimConfig c;
    c.engine.scheme = s;
    r[s] = simulate(c, trace);
  }
  std::vector<std::vector<std::uint64_t>> epochs;
  epoch_pages(trace, epochs);
  std::size_t oracle_count = 0;
  for (const auto& e : epochs) oracle_count += oracle::dedup_update_count(e, 8, 9);
  const auto cyc = [&](Scheme s) { return r[s].total_cycles; };
  const auto nodes = [&](Scheme s) { return r[s].stats.node_updates; };
  const double reduction = 1.0 - double(nodes(Scheme::coalesce)) / double(nodes(Scheme::ooo));
  Verdict v;
  v.pass = cyc(Scheme::sequential) > cyc(Scheme::pipeline) && cyc(Scheme::pipeline) > cyc(Scheme::ooo) &&
           cyc(Scheme::ooo) >= cyc(Scheme::coalesce) && reduction >= 0.5 && nodes(Scheme::coalesce) == oracle_count;
  v.detail = fmt("cycles seq=%llu pipe=%llu ooo=%llu coalesce=%llu; node updates ooo=%llu coalesce=%llu "
                 "(oracle %zu, reduction %.1f%%)",
                 (unsigned long long)cyc(Scheme::sequential), (unsigned long long)cyc(Scheme::pipeline),
                 (unsigned long long)cyc(Scheme::ooo), (unsigned long long)cyc(Scheme::coalesce),
                 (unsigned long long)nodes(Scheme::ooo), (unsigned long long)nodes(Scheme::coalesce), oracle_count,
                 100 * reduction);
  return v;
}

Verdict ac10() {
  Verdict v;
  std::size_t worst = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GenSpec g;
    g.stores = 200;
    g.pages = 64;
    g.fence_interval = 1;
    g.seed = seed;
    const auto trace = generate(g);
    SimConfig o = ideal(Scheme::ooo);
    o.engine.ett_capacity = o.engine.ptt_capacity;
    const auto a = simulate(o, trace);
    const auto b = simulate(ideal(Scheme::pipeline), trace);
    const std::size_t diff = a.total_cycles > b.total_cycles ? a.total_cycles - b.total_cycles
                                                             : b.total_cycles - a.total_cycles;
    worst = std::max(worst, diff);
  }
  v.pass = worst <= 40;
  v.detail = fmt("ooo(epoch=1) vs pipeline worst |diff|=%zu cycles; ", worst);

  std::size_t increases = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::uint64_t prev = ~0ULL;
    std::string counts;
    for (std::size_t e = 1; e <= 64; e *= 2) {
      GenSpec g;
      g.stores = 256;
      g.pages = 32;
      g.run_length = 4;
      g.fence_interval = e;
      g.seed = seed;
      SimConfig c;
      c.engine.scheme = Scheme::coalesce;
      const auto n = simulate(c, generate(g)).stats.node_updates;
      increases += n > prev ? 1 : 0;
      prev = n;
      if (seed == 1) counts += std::to_string(n) + (e < 64 ? "," : "");
    }
    if (seed == 1) v.detail += "coalesce node updates for epoch 1..64 (seed 1): " + counts;
  }
  v.pass &= increases == 0;
  v.detail += fmt("; %zu increases over 10 traces", increases);
  return v;
}

Verdict ac11() {
  std::size_t differing = 0, runs = 0;
  for (Scheme s : kSchemes) {
    for (std::uint64_t seed : {1u, 7u}) {
      RunConfig rc;
      rc.scheme = s;
      rc.seed = seed;
      rc.stores = 500;
      rc.run_length = 8;
      auto render = [&] {
        const auto r = simulate(rc.sim_config(), rc.load_or_generate());
        std::ostringstream out;
        out << run_report(rc, r).dump(2);
        write_event_log(out, r);
        return out.str();
      };
      ++runs;
      differing += render() != render() ? 1 : 0;
    }
  }
  Verdict v;
  v.pass = differing == 0;
  v.detail = fmt("%zu config/seed pairs, %zu differing", runs, differing);
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> check;
    double budget_s;
  };
  const Criterion criteria[] = {
      {"AC1 golden sequential critical path", ac1, 1},
      {"AC2 pipelined throughput", ac2, 1},
      {"AC3 out-of-order throughput", ac3, 1},
      {"AC4 coalescing node count", ac4, 1},
      {"AC5 commutativity fuzz", ac5, 30},
      {"AC6 omission matrix", ac6, 1},
      {"AC7 strict crash-prefix sweep", ac7, 60},
      {"AC8 epoch ordering", ac8, 60},
      {"AC9 direction of effect", ac9, 60},
      {"AC10 epoch-size sweep", ac10, 60},
      {"AC11 determinism", ac11, 60},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && secs < c.budget_s;
    failed += pass ? 0 : 1;
    std::printf("%s %s: %s [%.2fs, budget %.0fs]\n", pass ? "PASS" : "FAIL", c.name, v.detail.c_str(), secs,
                c.budget_s);
  }
  return failed == 0 ? 0 : 1;
}
