// Command-line front end. Every subcommand prints one JSON document to stdout.
// Exit codes: 0 success, 1 a checked property failed, 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "decaysim/decaysim.hpp"

using namespace decaysim;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Overrides {
  std::string config_file;
  std::vector<std::string> sets;  // key=value

  void add_to(CLI::App* app) {
    app->add_option("--config", config_file, "JSON file with config keys");
    app->add_option("--set", sets, "override one config key (key=value), repeatable");
  }

  void apply(ScenarioConfig& cfg) const {
    if (!config_file.empty()) {
      auto j = parse_json(read_text(config_file), config_file);
      if (j.contains("config")) j = j.at("config");
      apply_overrides(cfg, j);
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw FormatError("--set expects key=value, got '" + kv + "'");
      const std::string key = kv.substr(0, eq), text = kv.substr(eq + 1);
      nlohmann::json value;
      try {
        value = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error&) {
        value = text;  // bare words such as per_round
      }
      set_config_value(cfg, key, value);
    }
    cfg.validate();
  }
};

void emit(const Json& j) { std::cout << j.dump(2) << "\n"; }

Instance load_with_overrides(const std::string& path, const Overrides& ov) {
  Instance inst = load_instance(path);
  ov.apply(inst.config);
  return inst;
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& kind, std::uint64_t seed, const std::string& output,
                 const Overrides& ov) {
  ScenarioConfig cfg;
  ov.apply(cfg);
  Instance inst;
  if (kind == "links") inst = generate_instance(cfg, seed);
  else if (kind == "broadcast") inst = generate_broadcast_instance(cfg, seed);
  else throw FormatError("--kind must be links or broadcast");
  const fs::path path = output.empty() ? output_root() / (kind + "_" + std::to_string(seed) + ".json")
                                       : fs::path(output);
  save_instance(path, inst);
  Json j = header("generated");
  j["path"] = path.string();
  j["digest"] = instance_digest(inst);
  j["nodes"] = inst.space.size();
  j["links"] = inst.links.size();
  if (inst.broadcast) j["users"] = inst.broadcast->users.size();
  emit(j);
  return kOk;
}

int cmd_validate(const std::string& path) {
  Json j = header("validation-report");
  j["path"] = path;
  Instance inst;
  try {
    inst = load_instance(path);
  } catch (const PreconditionError& e) {
    j["ok"] = false;
    j["structure"] = e.what();
    emit(j);
    return kCheckFailed;
  }
  const auto rep = validate_quasi_metric(inst.space);
  Json vs = Json::array();
  for (const auto& v : rep.violations)
    vs.push_back({{"kind", to_string(v.kind)}, {"u", v.u}, {"w", v.w}, {"v", v.v}});
  const auto pc = power_conditions_check(inst.links, inst.config);
  Json ps = Json::array();
  for (const auto& v : pc.violations) ps.push_back({{"kind", to_string(v.kind)}, {"v", v.v}, {"w", v.w}});
  j["ok"] = rep.ok();
  j["digest"] = instance_digest(inst);
  j["nodes"] = inst.space.size();
  j["violations"] = vs;
  j["truncated"] = rep.truncated;
  // Power conditions are reported; they are a property of the links, not
  // of the space.
  j["power_conditions_ok"] = pc.ok();
  j["power_conditions"] = ps;
  emit(j);
  return rep.ok() ? kOk : kCheckFailed;
}

int cmd_inspect(const std::string& path, const Overrides& ov) {
  const auto inst = load_with_overrides(path, ov);
  const auto& cfg = inst.config;
  Json j = header("inspection");
  j["digest"] = instance_digest(inst);
  j["nodes"] = inst.space.size();
  j["links"] = inst.links.size();
  const std::size_t centers = inst.space.size() > 64 ? 16 : 0;
  j["doubling_estimate"] = doubling_estimate(inst.space, 0.5, centers, centers);
  j["symmetric"] = inst.space.is_symmetric();
  if (!inst.links.empty()) {
    const auto n = inst.links.size();
    j["power_spread"] = power_spread(inst.links);
    double max_waff = 0.0, max_ack_ratio = 0.0;
    for (const auto& i : inst.links) {
      std::vector<QuasiLink> others;
      for (const auto& l : inst.links)
        if (l.id != i.id) others.push_back(l);
      max_waff = std::max(max_waff, waff(inst.space, others, i));
      for (const auto& l : inst.links)
        if (l.id != i.id) max_ack_ratio = std::max(max_ack_ratio, ack_affectance_ratio(inst.space, i, l).ratio);
    }
    j["max_waff_all_others"] = max_waff;
    j["max_ack_affectance_ratio"] = max_ack_ratio;
    const auto pal = color_palette(cfg, n);
    j["palette"] = {{"K", pal.K}, {"levels", pal.levels}};
    j["log_rounds"] = log_rounds(n);
    j["power_conditions_ok"] = power_conditions_check(inst.links, cfg).ok();
  }
  if (inst.broadcast) {
    const auto lad = power_ladder(cfg, inst.broadcast->users.size());
    const auto pid = ideal_power_set(inst, lad);
    const auto tb = transition_probability_bound(cfg.epsilon, cfg.r);
    const auto eb = expectation_bounds(cfg, lad.n);
    j["ladder"] = lad.p;
    j["success_probabilities"] = success_probabilities(inst, lad);
    j["affectances"] = broadcast_affectances(inst, lad);
    j["pid"] = {{"members", pid.members}, {"s", pid.s}, {"diagnostic", pid.diagnostic}};
    j["transition_bound"] = {{"value", tb.value}, {"vacuous", tb.vacuous}};
    j["expectation_bounds"] = {{"b", eb.b}, {"successes", eb.successes}, {"power", eb.power},
                               {"vacuous", eb.vacuous}};
  }
  emit(j);
  return kOk;
}

int cmd_guards(const std::string& path, NodeId target, const std::string& role, double prob,
               const Overrides& ov) {
  const auto inst = load_with_overrides(path, ov);
  const auto& cfg = inst.config;
  const std::size_t n = inst.space.size();
  if (target >= n) throw PreconditionError("--target out of range");
  const GuardRole r = role == "sender" ? GuardRole::kSender : GuardRole::kReceiver;
  if (role != "sender" && role != "receiver") throw FormatError("--role must be receiver or sender");
  const std::vector<double> probs(n, prob > 0.0 ? prob : cfg.C1 / (2.0 * static_cast<double>(n)));
  const auto dd = covering_decomposition(inst.space, target, 1.0, cfg.gamma1);
  const auto gs = build_guard_set(inst.space, target, r, dd, probs, cfg);
  const auto rep = verify_guard_property(inst.space, gs, probs, cfg);
  Json j = header("guards");
  j["target"] = target;
  j["role"] = role;
  j["unit"] = gs.unit;
  j["guards"] = gs.guards;
  j["group_of"] = gs.group_of;
  Json pairs = Json::array();
  for (const auto& [a, b] : rep.independence) pairs.push_back({a, b});
  j["report"] = {{"ok", rep.ok()},
                 {"independence", pairs},
                 {"property1", rep.property1},
                 {"guard_mass", rep.guard_mass},
                 {"group_cap", rep.group_cap},
                 {"activation", rep.activation}};
  emit(j);
  return rep.ok() ? kOk : kCheckFailed;
}

int cmd_spaids(const std::string& path, std::uint64_t seed, const std::string& rounds_csv_path,
               const std::string& out_path, const Overrides& ov) {
  const auto inst = load_with_overrides(path, ov);
  SpaidsOptions opts;
  opts.record_rounds = !rounds_csv_path.empty();
  const auto res = spaids_run(inst, seed, opts);
  const auto j = schedule_to_json(res, inst, seed);
  if (!rounds_csv_path.empty()) write_text(rounds_csv_path, rounds_csv(res));
  if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
  emit(j);
  return res.feasible ? kOk : kCheckFailed;
}

int cmd_oams(const std::string& path, const std::vector<std::uint64_t>& seeds, const std::string& trace_dir,
             const Overrides& ov) {
  const auto inst = load_with_overrides(path, ov);
  const auto& cfg = inst.config;
  const auto lad = power_ladder(cfg, broadcast_of(inst).users.size());
  const auto pid = ideal_power_set(inst, lad);
  const auto tb = transition_probability_bound(cfg.epsilon, cfg.r);
  const auto eb = expectation_bounds(cfg, lad.n);
  Json runs = Json::array();
  bool ok = true;
  for (auto seed : seeds) {
    OamsOptions opts;
    opts.pid = &pid;
    const auto res = oams_run(inst, seed, opts);
    const bool within = res.consumed <= cfg.C_B;
    ok = ok && within;
    if (!trace_dir.empty())
      write_text(fs::path(trace_dir) / ("trace_seed" + std::to_string(seed) + ".csv"), chain_trace_csv(res));
    runs.push_back({{"seed", seed},
                    {"rounds", res.trace.size()},
                    {"delivered", res.delivered},
                    {"successes", res.successes},
                    {"consumed", res.consumed},
                    {"final_state", res.final_state},
                    {"halt", to_string(res.halt)},
                    {"battery_ok", within}});
  }
  Json j = header("oams-summary");
  j["digest"] = instance_digest(inst);
  j["ladder"] = lad.p;
  j["pid"] = {{"members", pid.members}, {"s", pid.s}};
  if (pid.s > 0) j["competitive_target"] = cfg.comp_C * cfg.C_B / lad.power(pid.s);
  j["transition_bound"] = {{"value", tb.value}, {"vacuous", tb.vacuous}};
  j["expectation_bounds"] = {{"b", eb.b}, {"successes", eb.successes}, {"power", eb.power},
                             {"vacuous", eb.vacuous}};
  j["runs"] = runs;
  emit(j);
  return ok ? kOk : kCheckFailed;
}

int cmd_oracle(const std::string& op, const std::string& path, std::size_t start) {
  Json j = header("oracle");
  j["op"] = op;
  if (op == "min-schedule") {
    const auto r = exact_min_schedule(load_instance(path));
    j["value"] = r.value;
    j["partition"] = r.partition;
    j["digest"] = r.digest;
  } else if (op == "broadcast") {
    const auto r = offline_optimal_broadcast(load_instance(path));
    j["value"] = r.value;
    j["subset"] = r.subset;
    j["digest"] = r.digest;
  } else if (op == "chain") {
    const auto c = chain_from_json(parse_json(read_text(path), path));
    const auto e = exact_chain_expectation(c);
    if (start < 1 || start > c.k()) throw PreconditionError("--start out of range");
    j["start"] = start;
    j["value"] = e.successes[start - 1];
    j["successes"] = e.successes;
    j["power"] = e.power;
    j["rounds"] = e.rounds;
  } else {
    throw FormatError("--op must be min-schedule, broadcast or chain");
  }
  emit(j);
  return kOk;
}

int cmd_run_plan(const std::string& path, const std::string& out_root) {
  const auto plan = load_plan(path);
  const auto outcome = run_plan(plan, out_root.empty() ? fs::path() : fs::path(out_root));
  auto j = plan_summary(plan, outcome.records);
  j["metrics"] = outcome.metrics_path.string();
  j["summary"] = outcome.summary_path.string();
  j.erase("plan");
  emit(j);
  return outcome.failed_checks == 0 ? kOk : kCheckFailed;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  const fs::path dir = out_dir.empty() ? output_root() / "report" : fs::path(out_dir);
  const auto rep = write_report(paths, dir);
  Json j = header("report-written");
  j["directory"] = dir.string();
  Json sections = Json::object();
  for (const auto& [alg, groups] : rep.sections) sections[alg] = groups.size();
  j["groups"] = sections;
  emit(j);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decay-space SINR scheduling and online broadcast simulator"};
  app.require_subcommand(1);
  int rc = kOk;
  std::function<int()> action;

  Overrides ov;

  auto* gen = app.add_subcommand("generate", "generate an instance file");
  std::string kind = "links", gen_out;
  std::uint64_t gen_seed = 1;
  gen->add_option("--kind", kind, "links | broadcast");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("-o,--output", gen_out, "output file (default: $DECAYSIM_OUT/<kind>_<seed>.json)");
  ov.add_to(gen);
  gen->callback([&] { action = [&] { return cmd_generate(kind, gen_seed, gen_out, ov); }; });

  std::string inst_path;

  auto* val = app.add_subcommand("validate", "audit an instance's quasi-metric axioms");
  val->add_option("instance", inst_path)->required();
  val->callback([&] { action = [&] { return cmd_validate(inst_path); }; });

  auto* ins = app.add_subcommand("inspect", "derived quantities of an instance");
  ins->add_option("instance", inst_path)->required();
  ov.add_to(ins);
  ins->callback([&] { action = [&] { return cmd_inspect(inst_path, ov); }; });

  auto* grd = app.add_subcommand("guards", "build and verify a guard set");
  NodeId target = 0;
  std::string role = "receiver";
  double guard_prob = 0.0;
  grd->add_option("instance", inst_path)->required();
  grd->add_option("--target", target, "target node")->required();
  grd->add_option("--role", role, "receiver | sender");
  grd->add_option("--prob", guard_prob, "per-node probability (default C1/(2n))");
  ov.add_to(grd);
  grd->callback([&] { action = [&] { return cmd_guards(inst_path, target, role, guard_prob, ov); }; });

  auto* spa = app.add_subcommand("spaids", "run the distributed scheduler");
  std::uint64_t seed = 1;
  std::string rounds_path, result_path;
  spa->add_option("instance", inst_path)->required();
  spa->add_option("--seed", seed);
  spa->add_option("--rounds-csv", rounds_path, "per-round CSV output");
  spa->add_option("-o,--output", result_path, "result JSON file");
  ov.add_to(spa);
  spa->callback([&] { action = [&] { return cmd_spaids(inst_path, seed, rounds_path, result_path, ov); }; });

  auto* oam = app.add_subcommand("oams", "run online broadcast");
  std::vector<std::uint64_t> seeds{1};
  std::string trace_dir;
  oam->add_option("instance", inst_path)->required();
  oam->add_option("--seeds", seeds, "seed list")->delimiter(',');
  oam->add_option("--trace-dir", trace_dir, "write one trace CSV per seed");
  ov.add_to(oam);
  oam->callback([&] { action = [&] { return cmd_oams(inst_path, seeds, trace_dir, ov); }; });

  auto* ora = app.add_subcommand("oracle", "exact reference values");
  std::string op;
  std::size_t start = 1;
  ora->add_option("--op", op, "min-schedule | broadcast | chain")->required();
  ora->add_option("input", inst_path, "instance file, or chain file for --op chain")->required();
  ora->add_option("--start", start, "start state for --op chain");
  ora->callback([&] { action = [&] { return cmd_oracle(op, inst_path, start); }; });

  auto* rp = app.add_subcommand("run-plan", "execute an experiment plan");
  std::string plan_path, plan_out;
  rp->add_option("plan", plan_path)->required();
  rp->add_option("--out", plan_out, "output root (default: plan's output, then $DECAYSIM_OUT)");
  rp->callback([&] { action = [&] { return cmd_run_plan(plan_path, plan_out); }; });

  auto* rep = app.add_subcommand("report", "aggregate metrics files");
  std::vector<std::string> metrics;
  std::string report_out;
  rep->add_option("metrics", metrics, "metrics CSV files")->required();
  rep->add_option("--out", report_out, "output directory (default: $DECAYSIM_OUT/report)");
  rep->callback([&] { action = [&] { return cmd_report(metrics, report_out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  try {
    rc = action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return rc;
}
