#include "plpsim/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "plpsim/config.hpp"
#include "plpsim/crash.hpp"
#include "plpsim/report.hpp"
#include "plpsim/sim.hpp"

namespace plp {
namespace {

/// Raised when a run finishes but breaks a checked property.
class ViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigOptions {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_file, "key=value config file with [section] headers");
    for (const auto& f : config_fields()) {
      options[f.key] = app->add_option(f.flag(), values[f.key], f.help)->group(f.section);
    }
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) apply_config_file(cfg, config_file);
    apply_process_env(cfg);
    for (const auto& f : config_fields()) {
      auto it = options.find(f.key);
      if (it == options.end() || it->second->count() == 0) continue;
      try {
        f.set(cfg, values.at(f.key));
      } catch (const InputError& e) {
        throw InputError(f.flag() + ": " + e.what());
      }
    }
    return cfg;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

// ---------------------------------------------------------------------------

int cmd_run(const RunConfig& cfg, const std::string& out_path, const std::string& events_path,
            const std::string& baseline, std::ostream& out) {
  const auto trace = cfg.load_or_generate();
  const RunResult r = simulate(cfg.sim_config(), trace);
  std::optional<RunResult> base;
  if (!baseline.empty()) {
    RunConfig bc = cfg;
    bc.scheme = parse_scheme(baseline);
    base = simulate(bc.sim_config(), trace);
  }
  if (cfg.format == OutputFormat::json) {
    emit(out_path, run_report(cfg, r, base).dump(2) + "\n", out);
  } else {
    emit(out_path, sweep_csv_header() + "\n" + sweep_csv_row("run", "-", r) + "\n", out);
  }
  if (!events_path.empty()) {
    std::ostringstream log;
    write_event_log(log, r);
    emit(events_path, log.str(), out);
  }
  return kExitOk;
}

int cmd_crash_sweep(const RunConfig& cfg, std::size_t points, std::size_t traces, bool matrix,
                    const std::string& out_path, std::ostream& out) {
  if (points == 0) throw InputError("--points must be at least 1");
  if (traces == 0) throw InputError("--traces must be at least 1");
  const bool strict = !is_epoch_scheme(cfg.scheme);

  Json failures = Json::array();
  std::size_t violations = 0;
  for (std::size_t t = 0; t < traces; ++t) {
    RunConfig tc = cfg;
    tc.seed = cfg.seed + t;
    const auto trace = tc.load_or_generate();
    const SimConfig sim = tc.sim_config();
    const RunResult full = simulate(sim, trace);
    const Cycle horizon = std::max(full.total_cycles, full.drain_cycles) + 1;
    const std::size_t n = points / traces + (t < points % traces ? 1 : 0);

    std::mt19937_64 rng(cfg.seed * 1000003ULL + t);
    std::uniform_int_distribution<Cycle> pick(0, horizon);
    std::vector<Cycle> cycles(n);
    for (auto& c : cycles) c = pick(rng);
    std::sort(cycles.begin(), cycles.end());

    std::size_t last_prefix = 0;
    for (Cycle c : cycles) {
      CrashPlan plan;
      plan.cycle = c;
      const RecoveryReport rep = recover(sim, trace, crash(sim, trace, plan));
      std::string reason = rep.consistent ? "" : rep.reason;
      if (rep.consistent && strict) {
        const std::size_t k = rep.matching_prefixes.back();
        if (k < last_prefix) reason = "recovered prefix moved backwards";
        last_prefix = std::max(last_prefix, k);
      }
      if (!reason.empty()) {
        ++violations;
        failures.push_back({{"trace_seed", tc.seed}, {"cycle", c}, {"reason", reason}});
      }
    }
  }

  Json j;
  j["command"] = "crash-sweep";
  j["config"] = config_json(cfg);
  j["config_hash"] = config_hash(cfg);
  j["points"] = points;
  j["traces"] = traces;
  j["violations"] = violations;
  j["failures"] = failures;
  bool matrix_ok = true;
  if (matrix) {
    Json rows = Json::array();
    for (const auto& row : omission_matrix(cfg.sim_config())) {
      rows.push_back({{"omitted", to_string(row.omitted)},
                      {"expected", std::vector<std::string>(row.expected.begin(), row.expected.end())},
                      {"observed", std::vector<std::string>(row.observed.begin(), row.observed.end())},
                      {"match", row.match()}});
      matrix_ok &= row.match();
    }
    j["omission_matrix"] = rows;
  }
  emit(out_path, j.dump(2) + "\n", out);
  if (violations > 0 || !matrix_ok) {
    throw ViolationError(std::to_string(violations) + " crash point(s) recovered inconsistently" +
                         (matrix_ok ? "" : "; omission matrix mismatch"));
  }
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const std::string& axis, const std::string& values_text,
              const std::string& schemes_text, unsigned jobs, const std::string& out_path, std::ostream& out) {
  if (axis != "epoch_size" && axis != "mac_latency" && axis != "cache_kb") {
    throw InputError("unknown sweep axis '" + axis + "' (epoch_size, mac_latency, cache_kb)");
  }
  if (axis == "epoch_size" && !cfg.trace.empty()) {
    throw InputError("an epoch_size sweep needs a generated trace, not --trace");
  }
  std::vector<std::uint64_t> values;
  for (const auto& v : split_list(values_text)) {
    RunConfig probe;
    find_field("stores")->set(probe, v);  // same unsigned parsing rules
    values.push_back(probe.stores);
  }
  if (values.empty()) throw InputError("--values needs at least one value");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  std::vector<Scheme> schemes;
  for (const auto& s : split_list(schemes_text)) schemes.push_back(parse_scheme(s));
  if (schemes.empty()) schemes.push_back(cfg.scheme);

  struct Point {
    std::uint64_t value;
    Scheme scheme;
    std::string row;
    std::string error;
    bool deadlock = false;
  };
  std::vector<Point> pts;
  for (auto v : values) {
    for (auto s : schemes) pts.push_back({v, s, {}, {}});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      Point& p = pts[i];
      RunConfig pc = cfg;
      pc.scheme = p.scheme;
      if (axis == "epoch_size") pc.epoch_size = p.value;
      if (axis == "mac_latency") pc.mac_latency = p.value;
      if (axis == "cache_kb") pc.counter_cache_kb = pc.mac_cache_kb = pc.bmt_cache_kb = p.value;
      try {
        p.row = sweep_csv_row(axis, std::to_string(p.value), simulate(pc.sim_config(), pc.load_or_generate()));
      } catch (const DeadlockError& e) {
        p.error = e.what();
        p.deadlock = true;
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, unsigned(pts.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string csv = sweep_csv_header() + "\n";
  for (const auto& p : pts) {
    if (p.deadlock) throw DeadlockError(p.error);
    if (!p.error.empty()) throw InputError(p.error);
    csv += p.row + "\n";
  }
  emit(out_path, csv, out);
  return kExitOk;
}

int cmd_gen_trace(const RunConfig& cfg, const std::string& out_path, std::ostream& out) {
  const GenSpec g = cfg.gen_spec();
  const auto trace = generate(g);
  std::ostringstream text;
  text << "# stores=" << g.stores << " pages=" << g.pages << " page_base=" << g.page_base
       << " run_length=" << g.run_length << " epoch_size=" << g.fence_interval << " seed=" << g.seed << "\n";
  text << render_trace(trace);
  emit(out_path, text.str(), out);
  return kExitOk;
}

int cmd_verify_trace(const RunConfig& cfg, const std::string& path, std::ostream& out) {
  const auto trace = load_trace(path);
  const BmtGeometry geometry(cfg.arity, cfg.levels);
  std::set<std::uint64_t> pages;
  std::size_t stores = 0;
  std::size_t fences = 0;
  for (const auto& ev : trace) {
    if (!ev.is_store()) {
      ++fences;
      continue;
    }
    ++stores;
    try {
      geometry.leaf_for_page(ev.addr.page());
    } catch (const InputError& e) {
      throw TraceParseError(ev.line, e.what());
    }
    pages.insert(ev.addr.page());
  }
  Json j;
  j["file"] = path;
  j["valid"] = true;
  j["events"] = trace.size();
  j["stores"] = stores;
  j["fences"] = fences;
  j["distinct_pages"] = pages.size();
  j["max_page"] = pages.empty() ? Json(nullptr) : Json(*pages.rbegin());
  out << j.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secure persistent-memory BMT update simulator", "plpsim"};
  app.require_subcommand(1);

  ConfigOptions run_opts, crash_opts, sweep_opts, gen_opts, verify_opts;
  std::string out_path, events_path, baseline, axis, values, schemes, trace_path;
  std::size_t points = 100, traces = 1;
  unsigned jobs = 1;
  bool matrix = false;

  auto* run = app.add_subcommand("run", "simulate one configuration and print a JSON report");
  run_opts.attach(run);
  run->add_option("-o,--out", out_path, "write the report here instead of stdout");
  run->add_option("--events", events_path, "write the event log (CSV) to this file");
  run->add_option("--baseline", baseline, "also run this scheme and report the normalized slowdown");

  auto* crash_cmd = app.add_subcommand("crash-sweep", "inject crashes at random cycles and check recovery");
  crash_opts.attach(crash_cmd);
  crash_cmd->add_option("-o,--out", out_path, "write the report here instead of stdout");
  crash_cmd->add_option("-n,--points", points, "crash points in total");
  crash_cmd->add_option("--traces", traces, "traces to spread the points over (seeds seed..seed+traces-1)");
  crash_cmd->add_flag("--omission-matrix", matrix, "also run the single-component omission matrix");

  auto* sweep = app.add_subcommand("sweep", "vary one parameter and print a CSV table");
  sweep_opts.attach(sweep);
  sweep->add_option("-o,--out", out_path, "write the table here instead of stdout");
  sweep->add_option("--axis", axis, "epoch_size, mac_latency or cache_kb")->required();
  sweep->add_option("--values", values, "comma-separated axis values")->required();
  sweep->add_option("--schemes", schemes, "comma-separated schemes (default: --scheme)");
  sweep->add_option("-j,--jobs", jobs, "parallel workers");

  auto* gen = app.add_subcommand("gen-trace", "write a synthetic trace");
  gen_opts.attach(gen);
  gen->add_option("-o,--out", out_path, "write the trace here instead of stdout");

  auto* verify = app.add_subcommand("verify-trace", "parse a trace file and summarize it");
  verify_opts.attach(verify);
  verify->add_option("file", trace_path, "trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts.resolve(), out_path, events_path, baseline, out);
    if (crash_cmd->parsed()) return cmd_crash_sweep(crash_opts.resolve(), points, traces, matrix, out_path, out);
    if (sweep->parsed()) return cmd_sweep(sweep_opts.resolve(), axis, values, schemes, jobs, out_path, out);
    if (gen->parsed()) return cmd_gen_trace(gen_opts.resolve(), out_path, out);
    if (verify->parsed()) return cmd_verify_trace(verify_opts.resolve(), trace_path, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ViolationError& e) {
    err << "violation: " << e.what() << "\n";
    return kExitViolation;
  } catch (const DeadlockError& e) {
    err << "deadlock: " << e.what() << "\n";
    return kExitDeadlock;
  }
  return kExitUsage;
}

}  // namespace plp
