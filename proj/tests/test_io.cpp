#include <gtest/gtest.h>

#include <filesystem>

#include "decaysim/io.hpp"

using namespace decaysim;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("decaysim_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(InstanceFile, RoundTripIsExact) {
  ScenarioConfig cfg;
  cfg.n_links = 6;
  cfg.sigma = 1.5;
  const auto inst = generate_instance(cfg, 11);
  const auto path = temp_dir("rt") / "inst.json";
  save_instance(path, inst);
  const auto back = load_instance(path);
  EXPECT_EQ(instance_digest(back), instance_digest(inst));
  EXPECT_EQ(back.space.matrix(), inst.space.matrix());
  EXPECT_EQ(back.space.coords, inst.space.coords);
  ASSERT_EQ(back.links.size(), inst.links.size());
  for (std::size_t i = 0; i < inst.links.size(); ++i)
    EXPECT_EQ(back.links[i].length, inst.links[i].length);
  EXPECT_EQ(back.config.sigma, 1.5);
  EXPECT_EQ(back.config.seed, 11u);
  // Saving again gives the same bytes.
  EXPECT_EQ(instance_to_json(back).dump(), instance_to_json(inst).dump());
}

TEST(InstanceFile, BroadcastBlockSurvives) {
  ScenarioConfig cfg;
  cfg.n_users = 5;
  cfg.n_interferers = 2;
  const auto inst = generate_broadcast_instance(cfg, 3);
  const auto back = instance_from_json(instance_to_json(inst));
  ASSERT_TRUE(back.broadcast.has_value());
  EXPECT_EQ(back.broadcast->users, inst.broadcast->users);
  EXPECT_EQ(back.broadcast->weights, inst.broadcast->weights);
  ASSERT_EQ(back.broadcast->interferers.size(), 2u);
  EXPECT_EQ(back.broadcast->interferers[1].activity, inst.broadcast->interferers[1].activity);
  EXPECT_EQ(instance_digest(back), instance_digest(inst));
}

TEST(InstanceFile, Rejections) {
  ScenarioConfig cfg;
  cfg.n_links = 2;
  auto j = instance_to_json(generate_instance(cfg, 1));

  auto bad_version = j;
  bad_version["format_version"] = 2;
  EXPECT_THROW(instance_from_json(bad_version), FormatError);

  auto no_version = j;
  no_version.erase("format_version");
  EXPECT_THROW(instance_from_json(no_version), FormatError);

  auto wrong_kind = j;
  wrong_kind["kind"] = "plan";
  EXPECT_THROW(instance_from_json(wrong_kind), FormatError);

  auto bad_key = j;
  bad_key["config"]["no_such_key"] = 1;
  EXPECT_THROW(instance_from_json(bad_key), FormatError);

  auto bad_endpoint = j;
  bad_endpoint["links"][0]["receiver"] = 99;
  EXPECT_THROW(instance_from_json(bad_endpoint), PreconditionError);

  auto missing = j;
  missing.erase("matrix");
  EXPECT_THROW(instance_from_json(missing), FormatError);

  EXPECT_THROW(parse_json("{not json", "x"), FormatError);
  EXPECT_THROW(load_instance("/nonexistent/inst.json"), FormatError);
}

TEST(Csv, RoundTripWithQuoting) {
  CsvWriter w({"a", "b"});
  w.row({"1", "x,y"});
  w.row({"say \"hi\"", ""});
  const auto t = parse_csv(w.str());
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "x,y");
  EXPECT_EQ(t.rows[1][0], "say \"hi\"");
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_THROW(t.column("c"), FormatError);
  EXPECT_THROW(w.row({"only one"}), FormatError);
}

TEST(Csv, VersionLineRequired) {
  EXPECT_THROW(parse_csv("a,b\n1,2\n"), FormatError);
  EXPECT_THROW(parse_csv(std::string(kCsvVersionLine) + "\na,b\n1\n"), FormatError);
}

TEST(Csv, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.123, -2.5, 0.0})
    EXPECT_EQ(std::strtod(fmt_double(v).c_str(), nullptr), v);
  EXPECT_EQ(fmt_double(0.5), "0.5");
}

TEST(AlgorithmOutput, SpaidsRoundsCsvColumns) {
  ScenarioConfig cfg;
  cfg.n_links = 4;
  const auto inst = generate_instance(cfg, 2);
  SpaidsOptions opts;
  opts.record_rounds = true;
  SpaidsEngine eng(inst, 5, opts);
  const auto res = eng.run();
  const auto t = parse_csv(rounds_csv(res));
  const std::vector<std::string> cols{"slot", "phase", "link", "transmitted",
                                      "sinr", "data_ok", "ack_ok", "quit"};
  EXPECT_EQ(t.columns, cols);
  EXPECT_FALSE(t.rows.empty());
  std::size_t quits = 0;
  for (const auto& r : t.rows) quits += r[t.column("quit")] == "1";
  EXPECT_EQ(quits + res.forced, inst.links.size());

  const auto j = schedule_to_json(res, inst, 5);
  EXPECT_EQ(j["format_version"], kFormatVersion);
  EXPECT_EQ(j["slots"], res.slots());
}

TEST(AlgorithmOutput, ChainTraceCsv) {
  ScenarioConfig cfg;
  cfg.n_users = 4;
  const auto inst = generate_broadcast_instance(cfg, 9);
  const auto res = oams_run(inst, 1);
  const auto t = parse_csv(chain_trace_csv(res));
  EXPECT_EQ(t.rows.size(), res.trace.size());
  EXPECT_EQ(t.columns.front(), "round");
  EXPECT_EQ(t.column("battery"), 6u);
}

TEST(ChainFile, RoundTrip) {
  ChainSpec c;
  c.down = {0.0, 0.5};
  c.stay = {0.5, 0.25};
  c.up = {0.5, 0.25};
  c.targets = {2, 4};
  c.q = {0.3, 0.6};
  c.charge_units = {1, 2};
  c.unit = 12.5;
  c.battery_units = 8;
  const auto back = chain_from_json(chain_to_json(c));
  EXPECT_EQ(back.up, c.up);
  EXPECT_EQ(back.charge_units, c.charge_units);
  EXPECT_EQ(back.unit, 12.5);
  auto bad = chain_to_json(c);
  bad["up"][0] = 0.9;
  EXPECT_THROW(chain_from_json(bad), PreconditionError);
}
