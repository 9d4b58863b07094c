#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "decaysim/config.hpp"
#include "decaysim/error.hpp"
#include "decaysim/instance.hpp"
#include "decaysim/oams.hpp"
#include "decaysim/oracle.hpp"
#include "decaysim/spaids.hpp"

namespace decaysim {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kCsvVersionLine = "# decaysim format_version=1";

// ---------------------------------------------------------------------------
// Files

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(what + ": " + e.what());
  }
}

// Every document carries {"format_version": 1, "kind": ...}.
inline void check_header(const Json& j, const std::string& kind) {
  if (!j.is_object()) throw FormatError(kind + ": top level must be an object");
  if (!j.contains("format_version")) throw FormatError(kind + ": missing format_version");
  if (j.at("format_version").get<int>() != kFormatVersion)
    throw FormatError(kind + ": unsupported format_version " + j.at("format_version").dump());
  if (!j.contains("kind") || j.at("kind").get<std::string>() != kind)
    throw FormatError("expected a '" + kind + "' document");
}

inline Json header(const std::string& kind) {
  Json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = kind;
  return j;
}

// ---------------------------------------------------------------------------
// Instances

inline Json instance_to_json(const Instance& inst) {
  Json j = header("instance");
  j["digest"] = instance_digest(inst);
  Json cfg;
  to_json(cfg, inst.config);
  j["config"] = cfg;
  const std::size_t n = inst.space.size();
  j["nodes"] = n;
  Json rows = Json::array();
  for (std::size_t u = 0; u < n; ++u) {
    auto r = inst.space.row(static_cast<NodeId>(u));
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  j["matrix"] = rows;
  if (!inst.space.coords.empty()) {
    Json pts = Json::array();
    for (const auto& c : inst.space.coords) pts.push_back({c[0], c[1]});
    j["coords"] = pts;
  }
  if (!inst.space.labels.empty()) j["labels"] = inst.space.labels;
  Json links = Json::array();
  for (const auto& l : inst.links)
    links.push_back({{"id", l.id},
                     {"sender", l.sender},
                     {"receiver", l.receiver},
                     {"power", l.power},
                     {"prob", l.prob},
                     {"active", l.active}});
  j["links"] = links;
  if (inst.broadcast) {
    const auto& b = *inst.broadcast;
    Json bj;
    bj["sender"] = b.sender;
    bj["users"] = b.users;
    bj["weights"] = b.weights;
    Json f = Json::array();
    for (const auto& it : b.interferers)
      f.push_back({{"node", it.node}, {"power", it.power}, {"activity", it.activity}});
    bj["interferers"] = f;
    j["broadcast"] = bj;
  }
  return j;
}

inline Instance instance_from_json(const Json& j) {
  check_header(j, "instance");
  Instance inst;
  try {
    if (j.contains("config")) inst.config = config_from_json(j.at("config"));
    const auto rows = j.at("matrix").get<std::vector<std::vector<double>>>();
    if (j.contains("nodes") && j.at("nodes").get<std::size_t>() != rows.size())
      throw FormatError("instance: 'nodes' disagrees with the matrix");
    inst.space = QuasiMetricSpace::from_rows(rows);
    if (j.contains("coords"))
      for (const auto& c : j.at("coords")) inst.space.coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    if (j.contains("labels")) inst.space.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& l : j.at("links")) {
      auto link = make_link(inst.space, l.at("id").get<std::size_t>(), l.at("sender").get<NodeId>(),
                            l.at("receiver").get<NodeId>(), l.at("power").get<double>(),
                            l.value("prob", 1.0));
      link.active = l.value("active", true);
      inst.links.push_back(link);
    }
    if (j.contains("broadcast")) {
      const auto& bj = j.at("broadcast");
      BroadcastSpec b;
      b.sender = bj.at("sender").get<NodeId>();
      b.users = bj.at("users").get<std::vector<NodeId>>();
      b.weights = bj.at("weights").get<std::vector<double>>();
      for (const auto& f : bj.value("interferers", Json::array()))
        b.interferers.push_back({f.at("node").get<NodeId>(), f.at("power").get<double>(),
                                 f.at("activity").get<double>()});
      inst.broadcast = std::move(b);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("instance: ") + e.what());
  }
  validate_instance(inst);
  return inst;
}

inline void save_instance(const std::filesystem::path& path, const Instance& inst) {
  write_text(path, instance_to_json(inst).dump(1) + "\n");
}

inline Instance load_instance(const std::filesystem::path& path) {
  return instance_from_json(parse_json(read_text(path), path.string()));
}

// ---------------------------------------------------------------------------
// CSV

// Shortest text that reads back to the same double.
inline std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {
    out_ << kCsvVersionLine << '\n';
    row(columns_);
  }
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw FormatError("csv: row width differs from header");
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << escape(cells[k]);
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string e = "\"";
    for (char c : s) {
      if (c == '"') e += '"';
      e += c;
    }
    return e + "\"";
  }
  std::vector<std::string> columns_;
  std::ostringstream out_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (columns[k] == name) return k;
    throw FormatError("csv: no column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline CsvTable parse_csv(const std::string& text, const std::string& what = "csv") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvVersionLine)
    throw FormatError(what + ": missing or unsupported version line");
  CsvTable t;
  if (!std::getline(in, line)) throw FormatError(what + ": missing header");
  t.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != t.columns.size())
      throw FormatError(what + ": row width " + std::to_string(cells.size()) + " != " +
                        std::to_string(t.columns.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Algorithm outputs

inline Json schedule_to_json(const ScheduleResult& r, const Instance& inst, std::uint64_t seed) {
  Json j = header("spaids-result");
  j["instance"] = instance_digest(inst);
  j["seed"] = seed;
  j["slots"] = r.slots();
  j["total_rounds"] = r.total_rounds;
  j["epochs"] = r.epochs;
  j["phases"] = r.phases;
  j["feasible"] = r.feasible;
  j["partial"] = r.partial;
  j["forced"] = r.forced;
  j["power_ratio"] = r.power_ratio;
  j["length_ratio"] = r.length_ratio;
  j["schedule"] = r.schedule;
  Json links = Json::array();
  for (std::size_t i = 0; i < r.links.size(); ++i)
    links.push_back({{"link", i},
                     {"slot", r.links[i].slot},
                     {"color", r.links[i].color},
                     {"quit_round", r.links[i].quit_round},
                     {"forced", r.links[i].forced}});
  j["links"] = links;
  j["acks"] = {{"data_attempts", r.acks.data_attempts},
               {"data_successes", r.acks.data_successes},
               {"ack_attempts", r.acks.ack_attempts},
               {"ack_successes", r.acks.ack_successes}};
  j["exit_colors"] = r.exit_colors;
  std::size_t passed = 0, confirmed = 0;
  for (const auto& g : r.gate_trace) {
    passed += g.passed;
    confirmed += g.confirmed;
  }
  j["gates"] = {{"evaluated", r.gate_trace.size()}, {"passed", passed}, {"confirmed", confirmed}};
  return j;
}

// Per-round CSV; needs a run with record_rounds on.
inline std::string rounds_csv(const ScheduleResult& r) {
  CsvWriter w({"slot", "phase", "link", "transmitted", "sinr", "data_ok", "ack_ok", "quit"});
  for (const auto& s : r.rounds)
    for (const auto& rec : s.records)
      w.row({std::to_string(s.round), std::to_string(s.phase), std::to_string(rec.link),
             std::to_string(int(rec.transmitted)), rec.transmitted ? fmt_double(rec.sinr) : "",
             std::to_string(int(rec.data_ok)), std::to_string(int(rec.ack_ok)),
             std::to_string(int(rec.quit))});
  return w.str();
}

inline std::string gates_csv(const ScheduleResult& r) {
  CsvWriter w({"round", "link", "near", "waff", "threshold", "passed", "confirmed"});
  for (const auto& g : r.gate_trace)
    w.row({std::to_string(g.round), std::to_string(g.link), std::to_string(g.near),
           fmt_double(g.waff), fmt_double(g.threshold), std::to_string(int(g.passed)),
           std::to_string(int(g.confirmed))});
  return w.str();
}

inline std::string chain_trace_csv(const OamsResult& r) {
  CsvWriter w({"round", "state", "power", "targets", "successes", "charged", "battery", "shadow"});
  for (const auto& c : r.trace)
    w.row({std::to_string(c.round), std::to_string(c.state), fmt_double(c.power),
           std::to_string(c.targets), std::to_string(c.successes), fmt_double(c.charged),
           fmt_double(c.battery), std::to_string(c.shadow)});
  return w.str();
}

// ---------------------------------------------------------------------------
// Chains for the expectation oracle

inline Json chain_to_json(const ChainSpec& c) {
  Json j = header("chain");
  j["down"] = c.down;
  j["stay"] = c.stay;
  j["up"] = c.up;
  j["targets"] = c.targets;
  j["q"] = c.q;
  j["charge_units"] = c.charge_units;
  j["unit"] = c.unit;
  j["battery_units"] = c.battery_units;
  return j;
}

inline ChainSpec chain_from_json(const Json& j) {
  check_header(j, "chain");
  ChainSpec c;
  try {
    c.down = j.at("down").get<std::vector<double>>();
    c.stay = j.at("stay").get<std::vector<double>>();
    c.up = j.at("up").get<std::vector<double>>();
    c.targets = j.at("targets").get<std::vector<std::size_t>>();
    c.q = j.at("q").get<std::vector<double>>();
    c.charge_units = j.at("charge_units").get<std::vector<std::size_t>>();
    c.unit = j.value("unit", 1.0);
    c.battery_units = j.at("battery_units").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("chain: ") + e.what());
  }
  validate_chain(c);
  return c;
}

}  // namespace decaysim
