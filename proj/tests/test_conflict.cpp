#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "decaysim/conflict.hpp"
#include "decaysim/instance.hpp"

using namespace decaysim;

namespace {

QuasiMetricSpace plane_space(const std::vector<std::array<double, 2>>& pts) {
  std::vector<std::vector<double>> rows(pts.size(), std::vector<double>(pts.size()));
  for (std::size_t u = 0; u < pts.size(); ++u)
    for (std::size_t v = 0; v < pts.size(); ++v)
      rows[u][v] = std::hypot(pts[u][0] - pts[v][0], pts[u][1] - pts[v][1]);
  return QuasiMetricSpace::from_rows(rows);
}

}  // namespace

TEST(IndependentPair, CoincidentLinksAreDependent) {
  auto space = plane_space({{0, 0}, {1, 0}});
  auto i = make_link(space, 0, 0, 1, 1.0);
  auto j = make_link(space, 1, 0, 1, 1.0);
  auto r = independent_pair(space, i, j, 1.0, 1.0);
  EXPECT_FALSE(r.gamma1);
  EXPECT_FALSE(r.r_gamma1);
}

TEST(IndependentPair, GammaThreshold) {
  // i = 0 -> 1 (length 1); j = 3 -> 4 with nearest endpoint 2 away from r_i.
  auto space = plane_space({{0, 0}, {1, 0}, {0, 0}, {3, 0}, {4, 0}});
  auto i = make_link(space, 0, 0, 1, 1.0);
  auto j = make_link(space, 1, 3, 4, 1.0);
  auto r = independent_pair(space, i, j, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(r.q_ji, 2.0);
  EXPECT_TRUE(r.gamma1);
}

TEST(IndependentPair, ProductDisjunctDecides) {
  // Directed distances from j to i are 1.9, from i to j vary.
  auto make = [](double back) {
    return QuasiMetricSpace::from_rows({{0, 1, back, back},
                                        {1, 0, back, back},
                                        {1.9, 1.9, 0, 1},
                                        {1.9, 1.9, 1, 0}});
  };
  for (double back : {0.1, 0.5}) {
    auto space = make(back);
    auto i = make_link(space, 0, 0, 1, 1.0);
    auto j = make_link(space, 1, 2, 3, 1.0);
    auto r = independent_pair(space, i, j, 4.0, 1.0);
    // 1.9 > 0.5 * 4 * 1 * 1 is false; product 1.9 * back vs 0.25.
    EXPECT_FALSE(r.q_ji > 2.0);
    EXPECT_EQ(r.r_gamma1, 1.9 * back > 0.25);
  }
}

TEST(Disks, RadiusArithmetic) {
  // Center 0; R = 2, gamma1 = 1, q = 1: rho_1 = 2, rho_2 = 3, rho_3 = 4.
  auto space = plane_space({{0, 0}, {2.5, 0}, {3.5, 0}, {9, 0}, {1, 0}});
  auto dd = disk_decomposition(space, 0, 1.0, 2.0, 1.0, 3);
  EXPECT_EQ(dd.disk_of[0], 0u);
  EXPECT_EQ(dd.disk_of[1], 2u);
  EXPECT_EQ(dd.disk_of[2], 3u);
  EXPECT_EQ(dd.disk_of[3], 0u);
  EXPECT_EQ(dd.disk_of[4], 0u);  // inside B_1, and D_1 is empty
  EXPECT_LT(dd.radius(1), dd.radius(2));
  EXPECT_THROW(disk_decomposition(space, 0, 1.0, 2.0, 1.0, 1), PreconditionError);
}

TEST(Disks, BoundaryBelongsToInnerDisk) {
  auto space = plane_space({{0, 0}, {3, 0}});
  auto dd = disk_decomposition(space, 0, 1.0, 2.0, 1.0, 5);
  EXPECT_EQ(dd.disk_of[1], 2u);
}

TEST(Disks, CoveringDecompositionReachesEveryone) {
  ScenarioConfig cfg;
  cfg.n_links = 8;
  auto inst = generate_instance(cfg, 4);
  auto dd = covering_decomposition(inst.space, 0, 1.0, 1.0);
  for (NodeId z = 1; z < inst.space.size(); ++z) EXPECT_GE(dd.disk_of[z], 2u);
}

TEST(WaffBound, ClosedForms) {
  ScenarioConfig cfg;
  cfg.gamma1 = 1.0;
  cfg.xi = 3.0;
  auto space = plane_space({{0, 0}, {1, 0}});
  auto i = make_link(space, 0, 0, 1, 1.0);
  auto b = waff_upper_bound(space, std::vector<QuasiLink>{}, i, i.length, 1.0, cfg);
  EXPECT_DOUBLE_EQ(b.bound, 2.0 * cfg.C_DI / cfg.C2);
  EXPECT_DOUBLE_EQ(b.corollary, cfg.C1 / cfg.C2);
  EXPECT_EQ(b.measured, 0.0);
  EXPECT_TRUE(b.preconditions_ok);
}

TEST(WaffBound, FlagsDependentMembers) {
  ScenarioConfig cfg;
  auto space = plane_space({{0, 0}, {1, 0}, {1.1, 0}, {2, 0}});
  auto i = make_link(space, 0, 0, 1, 1.0);
  auto j = make_link(space, 1, 2, 3, 1.0);
  auto b = waff_upper_bound(space, std::vector<QuasiLink>{j}, i, 1.0, 1.0, cfg);
  EXPECT_FALSE(b.preconditions_ok);
  EXPECT_EQ(b.target_violations, 1u);
}

TEST(DenseBall, SingleCarrier) {
  ScenarioConfig cfg;
  auto space = plane_space({{0, 0}, {2.5, 0}, {0.5, 0}});
  auto dd = disk_decomposition(space, 0, 1.0, 2.0, 1.0, 4);
  std::vector<double> probs{0.0, cfg.C1 / 2.0, 0.0};
  auto d = dense_ball(space, dd, probs, cfg);
  ASSERT_TRUE(d.found);
  EXPECT_EQ(d.center, 1u);
  EXPECT_DOUBLE_EQ(d.mass, cfg.C1 / 2.0);
  probs[1] = cfg.C1 / 2.0 - 1e-3;
  EXPECT_FALSE(dense_ball(space, dd, probs, cfg).found);
}

TEST(DenseBall, MatchesExhaustiveMaximum) {
  SplitMix64 rng(17);
  std::vector<std::array<double, 2>> pts{{0, 0}};
  for (int k = 0; k < 9; ++k) pts.push_back({rng.uniform(2.2, 4.0), rng.uniform(-1.0, 1.0)});
  auto space = plane_space(pts);
  auto dd = disk_decomposition(space, 0, 1.0, 2.0, 1.0, 6);
  ScenarioConfig cfg;
  cfg.s = 0.05;
  std::vector<double> probs(pts.size(), 0.0);
  for (std::size_t z = 1; z < pts.size(); ++z) probs[z] = rng.uniform(0.01, 0.06);
  auto d = dense_ball(space, dd, probs, cfg);
  ASSERT_TRUE(d.found);
  double best = 0.0;
  for (NodeId w = 0; w < pts.size(); ++w) {
    if (dd.disk_of[w] == 0) continue;
    double m = 0.0;
    for (NodeId z = 0; z < pts.size(); ++z)
      if (dd.disk_of[z] != 0 && space(w, z) <= 0.5) m += probs[z];
    if (m >= cfg.s && m <= 0.5) best = std::max(best, m);
  }
  EXPECT_DOUBLE_EQ(d.mass, best);
  EXPECT_TRUE(d.mass_in_range);
}

TEST(ReceiveBound, Examples) {
  EXPECT_DOUBLE_EQ(receive_probability_bound(0.25, 1.0, 1.0, 2.0, 2.0), 0.00390625);
  EXPECT_LT(receive_probability_bound(1e-9, 1.0, 1.0, 2.0, 2.0), 1e-9);
  double prev = 1.0;
  for (double k = 2; k < 8; ++k) {
    const double b = receive_probability_bound(0.25, 1.0, 1.0, k, 2.0);
    EXPECT_LT(b, prev);
    prev = b;
  }
  EXPECT_THROW(receive_probability_bound(0.6, 1, 1, 2, 2), PreconditionError);
}

TEST(DensityDominant, Examples) {
  auto space = plane_space({{0, 0}, {0.1, 0}, {0.2, 0}, {0.3, 0}});
  ScenarioConfig cfg;
  std::vector<double> probs{0.0, 0.6, 0.2, 0.0};
  std::vector<NodeId> recv{2}, others{1}, none;
  cfg.dd_mu = 2.25;
  cfg.dd_delta = 0.25;
  cfg.dd_lambda = 1.0;  // ratio 2: 0.6 > 0.4
  EXPECT_TRUE(density_dominant(space, 0, recv, others, 1.0, probs, cfg));
  EXPECT_TRUE(density_dominant(space, 0, none, others, 1.0, probs, cfg));
  cfg.dd_mu = 1.25;  // ratio 1, equal masses: strict inequality fails
  probs[2] = 0.6;
  EXPECT_FALSE(density_dominant(space, 0, recv, others, 1.0, probs, cfg));
  std::vector<NodeId> overlap{1};
  EXPECT_THROW(density_dominant(space, 0, overlap, others, 1.0, probs, cfg),
               PreconditionError);
}

TEST(Guards, TwoNodes) {
  auto space = plane_space({{0, 0}, {1, 0}});
  ScenarioConfig cfg;
  auto dd = covering_decomposition(space, 0, 1.0, 1.0);
  std::vector<double> probs{0.1, 0.1};
  auto gs = build_guard_set(space, 0, GuardRole::kReceiver, dd, probs, cfg);
  EXPECT_EQ(gs.guards, std::vector<NodeId>{1});
}

TEST(Guards, ClusterYieldsOneGuard) {
  auto space = QuasiMetricSpace::from_rows(
      {{0, 10, 10, 10}, {10, 0, 1, 1}, {10, 1, 0, 1}, {10, 1, 1, 0}});
  ScenarioConfig cfg;
  auto dd = covering_decomposition(space, 0, 1.0, 1.0);
  std::vector<double> probs(4, 0.05);
  auto gs = build_guard_set(space, 0, GuardRole::kReceiver, dd, probs, cfg);
  EXPECT_EQ(gs.guards, std::vector<NodeId>{1});
  EXPECT_TRUE(verify_guard_property(space, gs, probs, cfg).property1.empty());
}

TEST(Guards, EmptyDisks) {
  auto space = plane_space({{0, 0}, {0.5, 0}});
  ScenarioConfig cfg;
  auto dd = disk_decomposition(space, 0, 1.0, 1.0, 1.0, 3);  // node 1 sits in B_1
  std::vector<double> probs{0.1, 0.1};
  EXPECT_TRUE(build_guard_set(space, 0, GuardRole::kReceiver, dd, probs, cfg).guards.empty());
}

TEST(Guards, MassCapRespected) {
  auto space = plane_space({{0, 0}, {5, 0}, {0, 5}, {-5, 0}, {0, -5}});
  ScenarioConfig cfg;
  cfg.C_D = 0.25;
  auto dd = disk_decomposition(space, 0, 1.0, 1.0, 1.0, 8);
  std::vector<double> probs{0.0, 0.1, 0.1, 0.1, 0.1};
  auto gs = build_guard_set(space, 0, GuardRole::kReceiver, dd, probs, cfg);
  EXPECT_EQ(gs.guards.size(), 2u);
  EXPECT_LE(gs.group_mass.at(dd.disk_of[1]), cfg.C_D);
}

TEST(Guards, SenderShells) {
  auto space = plane_space({{0, 0}, {0.3, 0}, {0, -0.8}, {3, 0}});
  ScenarioConfig cfg;
  auto dd = disk_decomposition(space, 0, 1.0, 1.0, 1.0, 8);
  std::vector<double> probs(4, 0.05);
  auto gs = build_guard_set(space, 0, GuardRole::kSender, dd, probs, cfg);
  EXPECT_EQ(gs.guards, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(gs.group_of, (std::vector<std::size_t>{1, 2}));
}

TEST(GuardProperty, TrivialSets) {
  auto space = plane_space({{0, 0}, {1, 0}, {2, 0}, {0, 3}});
  ScenarioConfig cfg;
  GuardSet all{0, GuardRole::kReceiver, 1.0, {1, 2, 3}, {}, {}};
  EXPECT_TRUE(verify_guard_property(space, all, {}, cfg).property1.empty());
  GuardSet none{0, GuardRole::kReceiver, 1.0, {}, {}, {}};
  EXPECT_EQ(verify_guard_property(space, none, {}, cfg).property1.size(), 3u);
}

TEST(GuardProperty, GreedyOnSymmetricInstances) {
  ScenarioConfig cfg;
  cfg.sigma = 1.0;
  cfg.n_links = 4;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto inst = generate_instance(cfg, seed);
    const std::size_t n = inst.space.size();
    std::vector<double> probs(n, cfg.C1 / (2.0 * double(n)));
    auto dd = covering_decomposition(inst.space, 0, 1.0, cfg.gamma1);
    auto gs = build_guard_set(inst.space, 0, GuardRole::kReceiver, dd, probs, cfg);
    auto rep = verify_guard_property(inst.space, gs, probs, cfg);
    EXPECT_TRUE(rep.independence.empty()) << seed;
    EXPECT_TRUE(rep.property1.empty()) << seed;
    EXPECT_TRUE(rep.group_cap.empty()) << seed;
  }
}
