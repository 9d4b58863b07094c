#include <gtest/gtest.h>

#include "decaysim/instance.hpp"
#include "decaysim/sinrcore.hpp"

using namespace decaysim;

TEST(Generate, Deterministic) {
  ScenarioConfig cfg;
  cfg.n_links = 10;
  auto a = generate_instance(cfg, 42);
  auto b = generate_instance(cfg, 42);
  EXPECT_EQ(a.space, b.space);
  EXPECT_EQ(instance_digest(a), instance_digest(b));
  EXPECT_NE(instance_digest(a), instance_digest(generate_instance(cfg, 43)));
}

TEST(Generate, UnitStretchIsSymmetric) {
  ScenarioConfig cfg;
  cfg.sigma = 1.0;
  cfg.n_links = 12;
  auto inst = generate_instance(cfg, 5);
  EXPECT_TRUE(inst.space.is_symmetric());
}

TEST(Generate, EightNodesPassValidation) {
  ScenarioConfig cfg;
  cfg.n_links = 4;
  cfg.sigma = 1.5;
  auto inst = generate_instance(cfg, 7);
  ASSERT_EQ(inst.space.size(), 8u);
  EXPECT_TRUE(validate_quasi_metric(inst.space).ok());
  EXPECT_NO_THROW(validate_instance(inst));
  EXPECT_FALSE(inst.space.is_symmetric());
}

TEST(Generate, StrictModeRejectsPathLoss) {
  ScenarioConfig cfg;
  cfg.alpha = 6.5;
  EXPECT_THROW(generate_instance(cfg, 1), PreconditionError);
  cfg.strict = false;
  EXPECT_NO_THROW(generate_instance(cfg, 1));
}

TEST(Generate, PowersSatisfyConditions) {
  for (double tau : {0.0, 0.5, 1.0}) {
    ScenarioConfig cfg;
    cfg.power_tau = tau;
    cfg.n_links = 20;
    auto inst = generate_instance(cfg, 11);
    EXPECT_TRUE(power_conditions_check(inst.links, cfg).ok()) << "tau=" << tau;
  }
}

TEST(Generate, BroadcastInstance) {
  ScenarioConfig cfg;
  cfg.n_users = 6;
  cfg.n_interferers = 3;
  auto inst = generate_broadcast_instance(cfg, 9);
  ASSERT_TRUE(inst.broadcast.has_value());
  EXPECT_EQ(inst.space.size(), 10u);
  EXPECT_TRUE(inst.space.is_symmetric());
  EXPECT_NO_THROW(validate_instance(inst));
  double total = 0.0;
  for (double w : inst.broadcast->weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ValidateInstance, CatchesStaleLength) {
  ScenarioConfig cfg;
  auto inst = generate_instance(cfg, 2);
  inst.links[0].length *= 2;
  EXPECT_THROW(validate_instance(inst), PreconditionError);
}
