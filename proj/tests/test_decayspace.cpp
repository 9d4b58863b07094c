#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "decaysim/decayspace.hpp"
#include "decaysim/instance.hpp"

using namespace decaysim;

namespace {

QuasiMetricSpace line_space(std::size_t n, double alpha = 1.0) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      rows[u][v] = std::pow(std::abs(double(u) - double(v)), alpha);
  return QuasiMetricSpace::from_rows(rows);
}

QuasiMetricSpace grid_space(std::size_t side) {
  const std::size_t n = side * side;
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      const double dx = double(u % side) - double(v % side);
      const double dy = double(u / side) - double(v / side);
      rows[u][v] = std::hypot(dx, dy);
    }
  return QuasiMetricSpace::from_rows(rows);
}

// Largest eps*r-separated subset of the ball: exact maximum independent set
// of the "closer than sep" graph by include/exclude branching.
int mis(std::uint32_t mask, const std::vector<std::uint32_t>& adj) {
  if (mask == 0) return 0;
  const int v = std::countr_zero(mask);
  const std::uint32_t rest = mask & ~(1u << v);
  return std::max(mis(rest, adj), 1 + mis(rest & ~adj[v], adj));
}

std::size_t exact_packing(const QuasiMetricSpace& s, const std::vector<NodeId>& members,
                          double sep) {
  const std::size_t m = members.size();
  std::vector<std::uint32_t> adj(m, 0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a != b && s.sym(members[a], members[b]) < sep) adj[a] |= 1u << b;
  return static_cast<std::size_t>(mis((m == 32 ? ~0u : (1u << m) - 1), adj));
}

double exhaustive_doubling(const QuasiMetricSpace& s, double eps) {
  double best = 0.0;
  for (NodeId c = 0; c < s.size(); ++c) {
    auto row = s.row(c);
    std::vector<double> radii(row.begin(), row.end());
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    for (double r : radii) {
      if (r <= 0.0) continue;
      auto members = ball(s, {c, r});
      const double fine = double(exact_packing(s, members, eps * r));
      const double coarse = double(exact_packing(s, members, r));
      best = std::max(best, std::log(fine / coarse) / std::log(1.0 / eps));
    }
  }
  return best;
}

}  // namespace

TEST(Closure, ShortcutsThroughIntermediate) {
  auto q = closure_quasi_metric({{0, 5, 2}, {5, 0, 5}, {5, 2, 0}});
  EXPECT_DOUBLE_EQ(q(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(q(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(q(2, 1), 2.0);
}

TEST(Closure, IdempotentOnQuasiMetric) {
  auto q = closure_quasi_metric({{0, 5, 2}, {3, 0, 5}, {5, 2, 0}});
  auto again = closure_quasi_metric(q);
  EXPECT_EQ(q, again);
  auto line = line_space(6);
  EXPECT_EQ(closure_quasi_metric(line), line);
}

TEST(Closure, RejectsNegativeEntryByPosition) {
  try {
    closure_quasi_metric({{0, 1}, {-1, 0}});
    FAIL() << "expected rejection";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("(1,0)"), std::string::npos);
  }
  EXPECT_THROW(closure_quasi_metric({{1, 1}, {1, 0}}), PreconditionError);
  EXPECT_THROW(closure_quasi_metric({{0, 0}, {1, 0}}), PreconditionError);
}

TEST(Closure, EntriesNeverIncrease) {
  SplitMix64 rng(3);
  const std::size_t n = 12;
  std::vector<double> raw(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v) raw[u * n + v] = rng.uniform(0.1, 10.0);
  auto q = closure_quasi_metric(n, raw);
  for (std::size_t k = 0; k < n * n; ++k) EXPECT_LE(q.matrix()[k], raw[k]);
  EXPECT_TRUE(validate_quasi_metric(q).ok());
}

TEST(Validate, ReportsTriangleWitness) {
  auto s = QuasiMetricSpace::from_rows({{0, 10, 1}, {1, 0, 1}, {1, 1, 0}});
  auto rep = validate_quasi_metric(s);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].kind, AxiomViolation::kTriangle);
  EXPECT_EQ(rep.violations[0].u, 0u);
  EXPECT_EQ(rep.violations[0].w, 2u);
  EXPECT_EQ(rep.violations[0].v, 1u);
}

TEST(Validate, ReportsIdentityViolation) {
  auto s = QuasiMetricSpace::from_rows({{0, 0, 1}, {0, 0, 1}, {1, 1, 0}});
  auto rep = validate_quasi_metric(s);
  ASSERT_FALSE(rep.ok());
  EXPECT_TRUE(std::any_of(rep.violations.begin(), rep.violations.end(), [](auto& v) {
    return v.kind == AxiomViolation::kIdentity && v.u == 0 && v.v == 1;
  }));
}

TEST(Validate, ValidSpaceIsClean) {
  EXPECT_TRUE(validate_quasi_metric(line_space(5)).ok());
  EXPECT_TRUE(validate_quasi_metric(grid_space(3)).ok());
}

TEST(Validate, FlagsNonFiniteAndNegative) {
  auto s = QuasiMetricSpace::from_rows({{0, NAN}, {-1, 0}});
  auto rep = validate_quasi_metric(s);
  ASSERT_EQ(rep.violations.size(), 2u);
  EXPECT_EQ(rep.violations[0].kind, AxiomViolation::kNonFinite);
  EXPECT_EQ(rep.violations[1].kind, AxiomViolation::kNegative);
}

TEST(Ball, DirectedFromCenter) {
  auto q = closure_quasi_metric({{0, 5, 2}, {5, 0, 5}, {5, 2, 0}});
  // Row 0 after closure: 0, 4, 2.
  EXPECT_EQ(ball(q, {0, 0.0}), std::vector<NodeId>{0});
  EXPECT_EQ(ball(q, {0, 2.0}), (std::vector<NodeId>{0, 2}));
  EXPECT_EQ(ball(q, {0, 4.0}), (std::vector<NodeId>{0, 1, 2}));
  EXPECT_THROW(ball(q, {0, -1.0}), PreconditionError);
}

TEST(Ball, Monotone) {
  auto g = grid_space(4);
  for (double r1 : {0.5, 1.0, 1.5, 2.5})
    for (double r2 : {1.0, 2.0, 3.0})
      if (r1 <= r2) {
        auto a = ball(g, {5, r1});
        auto b = ball(g, {5, r2});
        EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
      }
}

TEST(Independence, Basics) {
  // Nodes 1 and 2 are close to each other and far from 0.
  auto s = QuasiMetricSpace::from_rows({{0, 10, 10}, {10, 0, 1}, {10, 1, 0}});
  std::vector<NodeId> empty, one{1}, both{1, 2};
  EXPECT_TRUE(independent_wrt(s, 0, empty));
  EXPECT_TRUE(independent_wrt(s, 0, one));
  EXPECT_FALSE(independent_wrt(s, 0, both));
  std::vector<NodeId> with_v{0, 1};
  EXPECT_THROW(independent_wrt(s, 0, with_v), PreconditionError);
  EXPECT_EQ(independence_dimension(s, 0), 1);
}

TEST(Independence, TwoNodes) {
  EXPECT_EQ(independence_dimension(line_space(2), 0), 1);
}

TEST(Independence, LineMatchesBruteForce) {
  auto s = line_space(7);
  for (NodeId v = 0; v < s.size(); ++v) {
    int best = 0;
    for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
      if (mask >> v & 1) continue;
      std::vector<NodeId> set;
      for (NodeId z = 0; z < s.size(); ++z)
        if (mask >> z & 1) set.push_back(z);
      if (independent_wrt(s, v, set)) best = std::max(best, int(set.size()));
    }
    EXPECT_EQ(independence_dimension(s, v), best) << "v=" << v;
    EXPECT_LE(independence_dimension_greedy(s, v), best);
  }
}

TEST(Independence, CapEnforced) {
  EXPECT_THROW(independence_dimension(line_space(17), 0), CapacityError);
  EXPECT_GE(independence_dimension_greedy(line_space(17), 0), 1);
}

TEST(Doubling, SingleNodeIsZero) {
  EXPECT_EQ(doubling_estimate(line_space(1), 0.5), 0.0);
}

TEST(Doubling, LineNearOne) {
  auto s = line_space(9);
  const double oracle = exhaustive_doubling(s, 0.5);
  const double est = doubling_estimate(s, 0.5);
  EXPECT_NEAR(oracle, 1.0, 0.5);
  EXPECT_NEAR(est, 1.0, 0.5);
}

TEST(Doubling, GridNearTwo) {
  auto s = grid_space(4);
  const double oracle = exhaustive_doubling(s, 0.5);
  const double est = doubling_estimate(s, 0.5);
  EXPECT_NEAR(oracle, 2.0, 0.5);
  EXPECT_NEAR(est, 2.0, 0.5);
}
