#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "decaysim/io.hpp"
#include "decaysim/oams.hpp"
#include "decaysim/oracle.hpp"
#include "decaysim/spaids.hpp"

namespace decaysim {

inline constexpr const char* kOutEnv = "DECAYSIM_OUT";

// Output root: explicit value, then $DECAYSIM_OUT, then ./decaysim_out.
inline std::filesystem::path output_root(const std::string& explicit_dir = {}) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv(kOutEnv); env && *env) return env;
  return "decaysim_out";
}

// ---------------------------------------------------------------------------
// Plans

enum class Algorithm { kSpaids, kOams };

inline const char* to_string(Algorithm a) { return a == Algorithm::kSpaids ? "spaids" : "oams"; }

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "spaids") return Algorithm::kSpaids;
  if (s == "oams") return Algorithm::kOams;
  throw FormatError("unknown algorithm '" + s + "' (spaids | oams)");
}

struct SweepAxis {
  std::string key;  // config key, or "n" for the algorithm's size parameter
  std::vector<Json> values;
};

struct ExperimentPlan {
  std::string id = "experiment";
  Algorithm algorithm = Algorithm::kSpaids;
  ScenarioConfig config;
  std::vector<SweepAxis> sweep;
  // Either generated instances (seeds first..first+count-1 per sweep point)
  // or a fixed list of files.
  std::uint64_t instance_seed = 1;
  std::size_t instance_count = 1;
  std::vector<std::filesystem::path> files;
  std::uint64_t seed_first = 1;
  std::size_t seed_count = 1;
  bool with_oracle = false;  // exact optimum per row when small enough
  std::size_t threads = 0;   // 0: hardware concurrency
  std::string output;        // empty: output_root()

  void validate() const {
    if (id.empty()) throw PreconditionError("plan: empty id");
    if (seed_count == 0) throw PreconditionError("plan: seed range is empty");
    if (files.empty() && instance_count == 0) throw PreconditionError("plan: no instances");
    for (const auto& f : files)
      if (!std::filesystem::exists(f)) throw PreconditionError("plan: missing file " + f.string());
    for (const auto& a : sweep)
      if (a.values.empty()) throw PreconditionError("plan: sweep axis '" + a.key + "' has no values");
    config.validate();
  }
};

inline std::string resolve_axis_key(const std::string& key, Algorithm a) {
  if (key == "n") return a == Algorithm::kSpaids ? "n_links" : "n_users";
  return key;
}

// Relative file paths resolve against `base_dir` (the plan's directory).
inline ExperimentPlan plan_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  check_header(j, "plan");
  ExperimentPlan p;
  try {
    p.id = j.value("id", p.id);
    p.algorithm = algorithm_from_string(j.value("algorithm", std::string("spaids")));
    if (j.contains("config")) p.config = config_from_json(j.at("config"));
    if (j.contains("sweep")) {
      for (const auto& [key, vals] : j.at("sweep").items()) {
        SweepAxis ax{key, {}};
        for (const auto& v : vals) ax.values.push_back(v);
        // Probe the key now so a typo fails at load.
        ScenarioConfig probe = p.config;
        if (!ax.values.empty())
          set_config_value(probe, resolve_axis_key(key, p.algorithm), nlohmann::json::parse(ax.values[0].dump()));
        p.sweep.push_back(std::move(ax));
      }
    }
    if (j.contains("instances")) {
      const auto& in = j.at("instances");
      if (in.contains("files")) {
        for (const auto& f : in.at("files")) {
          std::filesystem::path path = f.get<std::string>();
          p.files.push_back(path.is_relative() ? base_dir / path : path);
        }
      } else {
        p.instance_seed = in.value("seed", p.instance_seed);
        p.instance_count = in.value("count", p.instance_count);
      }
    }
    if (j.contains("seeds")) {
      p.seed_first = j.at("seeds").value("first", p.seed_first);
      p.seed_count = j.at("seeds").value("count", p.seed_count);
    }
    p.with_oracle = j.value("with_oracle", false);
    p.threads = j.value("threads", std::size_t{0});
    p.output = j.value("output", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("plan: ") + e.what());
  }
  p.validate();
  return p;
}

inline Json plan_to_json(const ExperimentPlan& p) {
  Json j = header("plan");
  j["id"] = p.id;
  j["algorithm"] = to_string(p.algorithm);
  Json cfg;
  to_json(cfg, p.config);
  j["config"] = cfg;
  Json sweep = Json::object();
  for (const auto& a : p.sweep) sweep[a.key] = a.values;
  j["sweep"] = sweep;
  if (!p.files.empty()) {
    Json files = Json::array();
    for (const auto& f : p.files) files.push_back(f.string());
    j["instances"] = {{"files", files}};
  } else {
    j["instances"] = {{"seed", p.instance_seed}, {"count", p.instance_count}};
  }
  j["seeds"] = {{"first", p.seed_first}, {"count", p.seed_count}};
  j["with_oracle"] = p.with_oracle;
  j["threads"] = p.threads;
  if (!p.output.empty()) j["output"] = p.output;
  return j;
}

inline ExperimentPlan load_plan(const std::filesystem::path& path) {
  return plan_from_json(parse_json(read_text(path), path.string()), path.parent_path());
}

// ---------------------------------------------------------------------------
// Metrics

// Fixed column set shared by both algorithms; cells that do not apply stay
// empty. wall_ms is the only nondeterministic column and is always last.
inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols{
      "experiment", "algorithm", "point", "instance", "instance_seed", "seed", "n",
      // spaids
      "slots", "rounds", "epochs", "feasible", "forced", "delta", "log2_n", "loglog_delta",
      "rounds_per_log2n", "opt_slots",
      // oams
      "delivered", "successes", "consumed", "battery", "halt", "pid_s", "target", "offline_opt",
      "bound_successes", "bound_power", "bound_vacuous",
      "wall_ms"};
  return cols;
}

struct MetricsRecord {
  std::string experiment;
  Algorithm algorithm = Algorithm::kSpaids;
  std::string point;  // "key=value;..." or "-" without a sweep
  std::string instance;
  std::uint64_t instance_seed = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::map<std::string, double> values;  // headline metrics and bounds
  bool check_ok = true;                   // acceptance-tagged assertion for the row
  std::string check_note;
  double wall_ms = 0.0;

  std::optional<double> get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
};

inline std::vector<std::string> record_cells(const MetricsRecord& r) {
  std::vector<std::string> cells;
  for (const auto& c : metric_columns()) {
    if (c == "experiment") cells.push_back(r.experiment);
    else if (c == "algorithm") cells.push_back(to_string(r.algorithm));
    else if (c == "point") cells.push_back(r.point);
    else if (c == "instance") cells.push_back(r.instance);
    else if (c == "instance_seed") cells.push_back(std::to_string(r.instance_seed));
    else if (c == "seed") cells.push_back(std::to_string(r.seed));
    else if (c == "n") cells.push_back(std::to_string(r.n));
    else if (c == "wall_ms") cells.push_back(fmt_double(r.wall_ms));
    else if (auto v = r.get(c)) cells.push_back(fmt_double(*v));
    else cells.push_back("");
  }
  return cells;
}

inline std::string metrics_csv(const std::vector<MetricsRecord>& records, bool with_wall = true) {
  auto cols = metric_columns();
  if (!with_wall) cols.pop_back();
  CsvWriter w(cols);
  for (const auto& r : records) {
    auto cells = record_cells(r);
    if (!with_wall) cells.pop_back();
    w.row(cells);
  }
  return w.str();
}

inline std::vector<MetricsRecord> parse_metrics(const std::string& text, const std::string& what = "metrics") {
  const auto t = parse_csv(text, what);
  const std::size_t c_alg = t.column("algorithm"), c_exp = t.column("experiment"),
                    c_pt = t.column("point"), c_inst = t.column("instance"),
                    c_iseed = t.column("instance_seed"), c_seed = t.column("seed"), c_n = t.column("n");
  std::vector<MetricsRecord> out;
  for (const auto& row : t.rows) {
    MetricsRecord r;
    try {
      r.experiment = row[c_exp];
      r.algorithm = algorithm_from_string(row[c_alg]);
      r.point = row[c_pt];
      r.instance = row[c_inst];
      r.instance_seed = std::stoull(row[c_iseed]);
      r.seed = std::stoull(row[c_seed]);
      r.n = std::stoull(row[c_n]);
      for (std::size_t k = 0; k < t.columns.size(); ++k) {
        const auto& name = t.columns[k];
        if (k == c_alg || k == c_exp || k == c_pt || k == c_inst || k == c_iseed || k == c_seed || k == c_n)
          continue;
        if (row[k].empty()) continue;
        if (name == "wall_ms") r.wall_ms = std::stod(row[k]);
        else r.values[name] = std::stod(row[k]);
      }
    } catch (const std::logic_error& e) {
      throw FormatError(what + ": bad number (" + e.what() + ")");
    }
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Row execution

struct PlanRow {
  std::size_t index = 0;
  std::string point;
  ScenarioConfig config;
  std::optional<std::filesystem::path> file;
  std::uint64_t instance_seed = 0;
  std::uint64_t seed = 0;
};

inline std::vector<PlanRow> expand_plan(const ExperimentPlan& plan) {
  // Cartesian product over the axes, last axis fastest.
  std::vector<std::pair<std::string, ScenarioConfig>> points{{"", plan.config}};
  for (const auto& ax : plan.sweep) {
    std::vector<std::pair<std::string, ScenarioConfig>> next;
    for (const auto& [label, cfg] : points)
      for (const auto& v : ax.values) {
        ScenarioConfig c = cfg;
        set_config_value(c, resolve_axis_key(ax.key, plan.algorithm), nlohmann::json::parse(v.dump()));
        next.push_back({label + (label.empty() ? "" : ";") + ax.key + "=" + v.dump(), c});
      }
    points = std::move(next);
  }
  std::vector<PlanRow> rows;
  for (const auto& [label, cfg] : points) {
    auto add = [&](std::optional<std::filesystem::path> file, std::uint64_t iseed) {
      for (std::size_t s = 0; s < plan.seed_count; ++s) {
        PlanRow r;
        r.index = rows.size();
        r.point = label.empty() ? "-" : label;
        r.config = cfg;
        r.file = file;
        r.instance_seed = iseed;
        r.seed = plan.seed_first + s;
        rows.push_back(std::move(r));
      }
    };
    if (!plan.files.empty())
      for (const auto& f : plan.files) add(f, 0);
    else
      for (std::size_t k = 0; k < plan.instance_count; ++k) add(std::nullopt, plan.instance_seed + k);
  }
  return rows;
}

inline double log2_floor1(double n) { return std::max(1.0, std::log2(n)); }

// log2 log2 Delta, 0 once Delta <= 4.
inline double loglog(double delta) { return std::log2(std::max(2.0, std::log2(std::max(1.0, delta)))); }

inline Instance row_instance(const PlanRow& row, Algorithm a) {
  if (row.file) {
    Instance inst = load_instance(*row.file);
    inst.config = row.config;  // sweep overrides apply to the numeric model
    inst.config.seed = row.instance_seed;
    return inst;
  }
  return a == Algorithm::kSpaids ? generate_instance(row.config, row.instance_seed)
                                 : generate_broadcast_instance(row.config, row.instance_seed);
}

inline void spaids_metrics(const Instance& inst, const PlanRow& row, bool with_oracle, MetricsRecord& rec) {
  SpaidsOptions opts;
  opts.record_gates = false;
  SpaidsEngine eng(inst, row.seed, opts);
  const auto res = eng.run();
  const double n = static_cast<double>(inst.links.size());
  rec.n = inst.links.size();
  rec.values["slots"] = static_cast<double>(res.slots());
  rec.values["rounds"] = static_cast<double>(res.total_rounds);
  rec.values["epochs"] = static_cast<double>(res.epochs);
  rec.values["feasible"] = res.feasible ? 1.0 : 0.0;
  rec.values["forced"] = static_cast<double>(res.forced);
  rec.values["delta"] = res.power_ratio;
  rec.values["log2_n"] = log2_floor1(n);
  rec.values["loglog_delta"] = loglog(res.power_ratio);
  rec.values["rounds_per_log2n"] = static_cast<double>(res.total_rounds) / log2_floor1(n);
  if (with_oracle && inst.links.size() <= kMaxOracleLinks)
    rec.values["opt_slots"] = exact_min_schedule(inst).value;
  if (!res.feasible) {
    rec.check_ok = false;
    rec.check_note = "schedule not SINR-feasible";
  }
}

inline void oams_metrics(const Instance& inst, const PlanRow& row, bool with_oracle, MetricsRecord& rec) {
  const auto& cfg = inst.config;
  OamsOptions opts;
  opts.record_trace = true;
  const auto res = oams_run(inst, row.seed, opts);
  rec.n = broadcast_of(inst).users.size();
  rec.values["rounds"] = static_cast<double>(res.trace.size());
  rec.values["delivered"] = static_cast<double>(res.delivered);
  rec.values["successes"] = static_cast<double>(res.successes);
  rec.values["consumed"] = res.consumed;
  rec.values["battery"] = cfg.C_B;
  rec.values["halt"] = static_cast<double>(static_cast<int>(res.halt));
  const auto pid = ideal_power_set(inst, res.ladder);
  if (pid.s > 0) {
    rec.values["pid_s"] = static_cast<double>(pid.s);
    rec.values["target"] = cfg.comp_C * cfg.C_B / res.ladder.power(pid.s);
  }
  if (with_oracle && rec.n <= kMaxOracleUsers)
    rec.values["offline_opt"] = offline_optimal_broadcast(inst).value;
  const auto eb = expectation_bounds(cfg, rec.n);
  rec.values["bound_vacuous"] = eb.vacuous ? 1.0 : 0.0;
  if (!eb.vacuous) {
    rec.values["bound_successes"] = eb.successes;
    rec.values["bound_power"] = eb.power;
  }
  bool ok = res.consumed <= cfg.C_B;
  for (const auto& c : res.trace) ok = ok && c.battery >= 0.0;
  if (!ok) {
    rec.check_ok = false;
    rec.check_note = "battery over-consumed";
  }
  if (auto opt = rec.get("offline_opt"); opt && static_cast<double>(res.delivered) > *opt) {
    rec.check_ok = false;
    rec.check_note = "delivered above the offline optimum";
  }
}

inline MetricsRecord run_row(const ExperimentPlan& plan, const PlanRow& row) {
  const auto t0 = std::chrono::steady_clock::now();
  MetricsRecord rec;
  rec.experiment = plan.id;
  rec.algorithm = plan.algorithm;
  rec.point = row.point;
  rec.instance_seed = row.instance_seed;
  rec.seed = row.seed;
  const Instance inst = row_instance(row, plan.algorithm);
  rec.instance = instance_digest(inst);
  if (plan.algorithm == Algorithm::kSpaids) spaids_metrics(inst, row, plan.with_oracle, rec);
  else oams_metrics(inst, row, plan.with_oracle, rec);
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// Runs every row on a worker pool. Each row fills its own slot, so the result
// is in plan order whatever the scheduling. The first failing row (in plan
// order) is rethrown after all workers finish.
inline std::vector<MetricsRecord> execute_plan(const ExperimentPlan& plan) {
  plan.validate();
  const auto rows = expand_plan(plan);
  std::vector<MetricsRecord> out(rows.size());
  std::vector<std::exception_ptr> errors(rows.size());
  std::size_t workers = plan.threads ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(rows.size(), 1));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < rows.size();) {
      try {
        out[k] = run_row(plan, rows[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

struct PlanOutcome {
  std::vector<MetricsRecord> records;
  std::filesystem::path metrics_path;
  std::filesystem::path summary_path;
  std::size_t failed_checks = 0;
};

inline Json plan_summary(const ExperimentPlan& plan, const std::vector<MetricsRecord>& records) {
  Json j = header("plan-summary");
  j["id"] = plan.id;
  j["algorithm"] = to_string(plan.algorithm);
  j["records"] = records.size();
  Json failures = Json::array();
  for (const auto& r : records)
    if (!r.check_ok)
      failures.push_back({{"point", r.point}, {"instance", r.instance}, {"seed", r.seed}, {"note", r.check_note}});
  j["failed_checks"] = failures.size();
  j["failures"] = failures;
  j["plan"] = plan_to_json(plan);
  return j;
}

// Writes <root>/<id>/metrics.csv and summary.json.
inline PlanOutcome run_plan(const ExperimentPlan& plan, const std::filesystem::path& root = {}) {
  PlanOutcome o;
  const auto dir = (root.empty() ? output_root(plan.output) : root) / plan.id;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error("run_plan: cannot create output directory " + dir.string());
  o.records = execute_plan(plan);
  for (const auto& r : o.records) o.failed_checks += !r.check_ok;
  o.metrics_path = dir / "metrics.csv";
  o.summary_path = dir / "summary.json";
  write_text(o.metrics_path, metrics_csv(o.records));
  write_text(o.summary_path, plan_summary(plan, o.records).dump(2) + "\n");
  return o;
}

// ---------------------------------------------------------------------------
// Report

// Linear interpolation between order statistics; q = 0.5 is the usual median
// (mean of the two middle values for an even count).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw PreconditionError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Summary {
  std::size_t count = 0;
  double median = 0.0, q25 = 0.0, q75 = 0.0, min = 0.0, max = 0.0, mean = 0.0;
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  s.count = v.size();
  s.median = quantile(v, 0.5);
  s.q25 = quantile(v, 0.25);
  s.q75 = quantile(v, 0.75);
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  return s;
}

struct ReportGroup {
  std::string experiment;
  std::string point;
  std::size_t records = 0;
  double n = 0.0;  // median n over the group
  std::map<std::string, Summary> metrics;
  double ref_log2_n = 0.0;
  double ref_loglog_delta = 0.0;
};

struct Report {
  std::map<std::string, std::vector<ReportGroup>> sections;  // by algorithm
};

inline Report build_report(const std::vector<MetricsRecord>& records) {
  if (records.empty()) throw PreconditionError("report: no metrics records");
  // Group by (algorithm, experiment, point), keeping first-seen order.
  std::map<std::string, std::vector<std::pair<std::string, std::vector<const MetricsRecord*>>>> groups;
  for (const auto& r : records) {
    auto& list = groups[to_string(r.algorithm)];
    const std::string key = r.experiment + "\n" + r.point;
    auto it = std::find_if(list.begin(), list.end(), [&](const auto& g) { return g.first == key; });
    if (it == list.end()) {
      list.push_back({key, {}});
      it = std::prev(list.end());
    }
    it->second.push_back(&r);
  }
  Report rep;
  for (const auto& [alg, list] : groups) {
    auto& section = rep.sections[alg];
    for (const auto& [key, recs] : list) {
      ReportGroup g;
      g.experiment = recs.front()->experiment;
      g.point = recs.front()->point;
      g.records = recs.size();
      std::map<std::string, std::vector<double>> cols;
      std::vector<double> ns;
      for (const auto* r : recs) {
        ns.push_back(static_cast<double>(r->n));
        for (const auto& [name, v] : r->values) cols[name].push_back(v);
      }
      g.n = quantile(ns, 0.5);
      for (const auto& [name, v] : cols) g.metrics[name] = summarize(v);
      g.ref_log2_n = log2_floor1(g.n);
      if (auto it = g.metrics.find("delta"); it != g.metrics.end())
        g.ref_loglog_delta = loglog(it->second.median);
      section.push_back(std::move(g));
    }
  }
  return rep;
}

inline Json report_to_json(const Report& rep) {
  Json j = header("report");
  Json sections = Json::array();
  for (const auto& [alg, groups] : rep.sections) {
    Json s;
    s["algorithm"] = alg;
    Json gs = Json::array();
    for (const auto& g : groups) {
      Json gj;
      gj["experiment"] = g.experiment;
      gj["point"] = g.point;
      gj["records"] = g.records;
      gj["n"] = g.n;
      gj["reference"] = {{"log2_n", g.ref_log2_n}, {"loglog_delta", g.ref_loglog_delta}};
      Json m = Json::object();
      for (const auto& [name, v] : g.metrics)
        m[name] = {{"count", v.count}, {"median", v.median}, {"q25", v.q25}, {"q75", v.q75},
                   {"min", v.min},     {"max", v.max},       {"mean", v.mean}};
      gj["metrics"] = m;
      gs.push_back(gj);
    }
    s["groups"] = gs;
    sections.push_back(s);
  }
  j["sections"] = sections;
  return j;
}

// Plot-ready table for one algorithm: one row per group, median/q25/q75 of
// each metric plus the reference series.
inline std::string report_csv(const Report& rep, const std::string& algorithm) {
  auto it = rep.sections.find(algorithm);
  if (it == rep.sections.end()) throw PreconditionError("report: no section for " + algorithm);
  std::vector<std::string> names;
  for (const auto& g : it->second)
    for (const auto& [name, v] : g.metrics)
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  std::sort(names.begin(), names.end());
  std::vector<std::string> cols{"experiment", "point", "records", "n", "ref_log2_n", "ref_loglog_delta"};
  for (const auto& name : names)
    for (const char* stat : {"median", "q25", "q75"}) cols.push_back(name + "_" + stat);
  CsvWriter w(cols);
  for (const auto& g : it->second) {
    std::vector<std::string> cells{g.experiment, g.point, std::to_string(g.records), fmt_double(g.n),
                                   fmt_double(g.ref_log2_n), fmt_double(g.ref_loglog_delta)};
    for (const auto& name : names) {
      auto m = g.metrics.find(name);
      if (m == g.metrics.end()) {
        cells.insert(cells.end(), 3, "");
        continue;
      }
      cells.push_back(fmt_double(m->second.median));
      cells.push_back(fmt_double(m->second.q25));
      cells.push_back(fmt_double(m->second.q75));
    }
    w.row(cells);
  }
  return w.str();
}

// Reads metrics files and writes report.json plus report_<algorithm>.csv.
inline Report write_report(const std::vector<std::filesystem::path>& inputs,
                           const std::filesystem::path& out_dir) {
  if (inputs.empty()) throw PreconditionError("report: no metrics files given");
  std::vector<MetricsRecord> all;
  for (const auto& p : inputs) {
    auto recs = parse_metrics(read_text(p), p.string());
    all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  const auto rep = build_report(all);
  write_text(out_dir / "report.json", report_to_json(rep).dump(2) + "\n");
  for (const auto& [alg, groups] : rep.sections)
    write_text(out_dir / ("report_" + alg + ".csv"), report_csv(rep, alg));
  return rep;
}

}  // namespace decaysim
