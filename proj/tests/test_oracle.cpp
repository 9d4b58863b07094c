#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "decaysim/instance.hpp"
#include "decaysim/oams.hpp"
#include "decaysim/oracle.hpp"
#include "decaysim/spaids.hpp"

using namespace decaysim;

namespace {

Instance plane_instance(const std::vector<std::array<double, 2>>& pts, ScenarioConfig cfg) {
  Instance inst;
  inst.config = cfg;
  const std::size_t n = pts.size();
  std::vector<double> raw(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v)
        raw[u * n + v] =
            std::pow(std::hypot(pts[u][0] - pts[v][0], pts[u][1] - pts[v][1]), cfg.alpha);
  inst.space = closure_quasi_metric(n, raw);
  for (std::size_t k = 0; k + 1 < n; k += 2)
    inst.links.push_back(make_link(inst.space, k / 2, k, k + 1, 1.0));
  assign_powers(inst.links, cfg);
  return inst;
}

ChainSpec two_state_chain() {
  ChainSpec c;
  c.down = {0.3, 0.4};
  c.stay = {0.3, 0.2};
  c.up = {0.4, 0.4};
  c.targets = {5, 10};
  c.q = {0.6, 0.3};
  c.charge_units = {1, 2};
  c.unit = 2.5;
  c.battery_units = 12;
  return c;
}

}  // namespace

TEST(MinSchedule, Empty) {
  Instance inst;
  inst.space = QuasiMetricSpace::from_rows({{0.0}});
  EXPECT_EQ(exact_min_schedule(inst).value, 0.0);
}

TEST(MinSchedule, FarLinksShareOneSlot) {
  ScenarioConfig cfg;
  auto inst = plane_instance({{0, 0}, {0.1, 0}, {40, 0}, {40.1, 0}, {0, 40}, {0.1, 40}}, cfg);
  auto res = exact_min_schedule(inst);
  EXPECT_EQ(res.value, 1.0);
  ASSERT_EQ(res.partition.size(), 1u);
  EXPECT_EQ(res.partition[0].size(), 3u);
}

TEST(MinSchedule, PairwiseConflictsNeedOneSlotEach) {
  ScenarioConfig cfg;
  // Parallel stacked links 0.01 apart: every pair is infeasible.
  std::vector<std::array<double, 2>> pts;
  for (int k = 0; k < 4; ++k) {
    pts.push_back({0.0, 0.01 * k});
    pts.push_back({0.2, 0.01 * k});
  }
  auto inst = plane_instance(pts, cfg);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b)
      ASSERT_FALSE(sinr_feasible(inst.space, std::vector<QuasiLink>{inst.links[a], inst.links[b]},
                                 cfg));
  EXPECT_EQ(exact_min_schedule(inst).value, 4.0);
}

TEST(MinSchedule, WitnessVerifiesAndBoundsSpaids) {
  ScenarioConfig cfg;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    cfg.n_links = 4 + static_cast<int>(seed);
    auto inst = generate_instance(cfg, seed);
    auto res = exact_min_schedule(inst);
    std::vector<int> seen(inst.links.size(), 0);
    for (const auto& slot : res.partition) {
      std::vector<QuasiLink> set;
      for (auto id : slot) {
        set.push_back(inst.links[id]);
        ++seen[id];
      }
      EXPECT_TRUE(sinr_feasible(inst.space, set, cfg));
    }
    for (int c : seen) EXPECT_EQ(c, 1);
    EXPECT_EQ(res.partition.size(), static_cast<std::size_t>(res.value));
    EXPECT_GE(static_cast<double>(spaids_run(inst, seed).slots()), res.value);
  }
}

TEST(MinSchedule, RejectsLargeInstances) {
  ScenarioConfig cfg;
  cfg.n_links = 13;
  EXPECT_THROW(exact_min_schedule(generate_instance(cfg, 1)), PreconditionError);
}

TEST(ChainOracle, SingleStateBatteryRounds) {
  ChainSpec c;
  c.down = {0.0};
  c.stay = {1.0};
  c.up = {0.0};
  c.targets = {7};
  c.q = {1.0};
  c.charge_units = {1};
  c.battery_units = 9;
  auto e = exact_chain_expectation(c);
  EXPECT_DOUBLE_EQ(e.successes[0], 63.0);
  EXPECT_DOUBLE_EQ(e.rounds[0], 9.0);
}

TEST(ChainOracle, AlwaysDownAbsorbsAfterIndexSteps) {
  ChainSpec c;
  const std::size_t k = 5;
  c.down.assign(k, 1.0);
  c.stay.assign(k, 0.0);
  c.up.assign(k, 0.0);
  c.targets.assign(k, 1);
  c.q.assign(k, 0.5);
  c.charge_units.assign(k, 0);
  auto e = exact_chain_expectation(c);
  for (std::size_t i = 1; i <= k; ++i) EXPECT_NEAR(e.rounds[i - 1], static_cast<double>(i), 1e-12);
}

TEST(ChainOracle, MatchesMonteCarlo) {
  auto c = two_state_chain();
  auto e = exact_chain_expectation(c);
  for (std::size_t start = 1; start <= 2; ++start) {
    auto mc = chain_monte_carlo(c, start, 1000000, 17 + start);
    EXPECT_NEAR(mc.successes, e.successes[start - 1], 0.01 * e.successes[start - 1]);
    EXPECT_NEAR(mc.power, e.power[start - 1], 3.5 * mc.power_se + 1e-12);
    EXPECT_NEAR(mc.rounds, e.rounds[start - 1], 3.5 * mc.rounds_se + 1e-12);
  }
}

TEST(ChainOracle, RejectsNonStochasticRows) {
  auto c = two_state_chain();
  c.up[1] = 0.5;
  EXPECT_THROW(exact_chain_expectation(c), PreconditionError);
}

TEST(ChainOracle, CostFreeTrapRejected) {
  ChainSpec c;
  c.down = {0.0};
  c.stay = {1.0};
  c.up = {0.0};
  c.targets = {1};
  c.q = {1.0};
  c.charge_units = {0};
  EXPECT_THROW(exact_chain_expectation(c), PreconditionError);
}

TEST(OfflineBroadcast, UnreachableUsersGiveZero) {
  ScenarioConfig cfg;
  cfg.noise = 1e9;
  auto inst = generate_broadcast_instance(cfg, 1);
  EXPECT_EQ(offline_optimal_broadcast(inst).value, 0.0);
}

TEST(OfflineBroadcast, AmpleBatteryReachesEveryone) {
  ScenarioConfig cfg;
  cfg.C_B = 1e6;
  auto inst = generate_broadcast_instance(cfg, 2);
  auto res = offline_optimal_broadcast(inst);
  EXPECT_EQ(res.value, static_cast<double>(cfg.n_users));
  EXPECT_EQ(res.subset.size(), static_cast<std::size_t>(cfg.n_users));
}

TEST(OfflineBroadcast, OrderIndependent) {
  ScenarioConfig cfg;
  cfg.n_users = 6;
  cfg.noise = 60.0;
  auto inst = generate_broadcast_instance(cfg, 3);
  const auto base = offline_optimal_broadcast(inst);
  std::vector<std::size_t> order{5, 3, 1, 0, 2, 4};
  for (int rep = 0; rep < 6; ++rep) {
    std::rotate(order.begin(), order.begin() + 1, order.end());
    EXPECT_EQ(offline_optimal_broadcast(inst, order).value, base.value);
  }
}

TEST(OfflineBroadcast, BoundsOnlineRuns) {
  ScenarioConfig cfg;
  cfg.n_users = 10;
  cfg.noise = 30.0;
  for (std::uint64_t inst_seed = 1; inst_seed <= 5; ++inst_seed) {
    auto inst = generate_broadcast_instance(cfg, inst_seed);
    const double opt = offline_optimal_broadcast(inst).value;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
      EXPECT_LE(static_cast<double>(oams_run(inst, seed).delivered), opt);
  }
}
