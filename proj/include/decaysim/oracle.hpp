#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "decaysim/error.hpp"
#include "decaysim/instance.hpp"
#include "decaysim/random.hpp"
#include "decaysim/sinrcore.hpp"

namespace decaysim {

enum class OracleKind { kMinSchedule, kChainExpectation, kOfflineBroadcast };

inline const char* to_string(OracleKind k) {
  switch (k) {
    case OracleKind::kMinSchedule: return "min-schedule";
    case OracleKind::kChainExpectation: return "chain-expectation";
    case OracleKind::kOfflineBroadcast: return "offline-broadcast";
  }
  return "unknown";
}

struct OracleResult {
  OracleKind kind = OracleKind::kMinSchedule;
  double value = 0.0;
  std::vector<std::vector<std::size_t>> partition;  // min-schedule witness
  std::vector<double> vector;                      // chain witness, per start state
  std::vector<std::size_t> subset;                 // broadcast witness
  std::string digest;
};

inline constexpr std::size_t kMaxOracleLinks = 12;

// Minimum number of SINR-feasible slots covering every link: feasible-subset
// table followed by a set-partition DP over masks.
inline OracleResult exact_min_schedule(const Instance& inst) {
  const std::size_t n = inst.links.size();
  if (n > kMaxOracleLinks)
    throw PreconditionError("exact_min_schedule: at most 12 links, got " + std::to_string(n));
  OracleResult res;
  res.kind = OracleKind::kMinSchedule;
  res.digest = instance_digest(inst);
  if (n == 0) return res;

  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  // Removing a link only lowers interference, so a set is feasible iff it
  // passes the check and its subset without the top link is feasible.
  std::vector<char> feasible(full + 1, 0);
  feasible[0] = 1;
  std::vector<QuasiLink> set;
  for (std::uint32_t m = 1; m <= full; ++m) {
    const std::uint32_t top = std::uint32_t{1} << (31 - __builtin_clz(m));
    if (!feasible[m ^ top]) continue;
    set.clear();
    for (std::size_t k = 0; k < n; ++k)
      if (m >> k & 1u) set.push_back(inst.links[k]);
    feasible[m] = sinr_feasible(inst.space, set, inst.config);
  }

  constexpr int kInf = std::numeric_limits<int>::max() / 2;
  std::vector<int> dp(full + 1, kInf);
  std::vector<std::uint32_t> pick(full + 1, 0);
  dp[0] = 0;
  for (std::uint32_t m = 1; m <= full; ++m) {
    const std::uint32_t low = m & (~m + 1);
    const std::uint32_t rest = m ^ low;
    // Enumerate submasks of `rest`; each candidate slot contains the low bit.
    for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
      const std::uint32_t slot = sub | low;
      if (feasible[slot] && dp[m ^ slot] + 1 < dp[m]) {
        dp[m] = dp[m ^ slot] + 1;
        pick[m] = slot;
      }
      if (sub == 0) break;
    }
  }
  if (dp[full] >= kInf) throw PreconditionError("exact_min_schedule: some link is infeasible alone");
  res.value = dp[full];
  for (std::uint32_t m = full; m != 0; m ^= pick[m]) {
    std::vector<std::size_t> slot;
    for (std::size_t k = 0; k < n; ++k)
      if (pick[m] >> k & 1u) slot.push_back(inst.links[k].id);
    res.partition.push_back(std::move(slot));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Chain expectation

// Birth-death chain over states 1..k. Moving down from state 1 is absorption;
// moving up from k stays at k. A visit to state i draws Binomial(targets_i,
// q_i) successes and costs charge_units_i battery units; a visit the battery
// cannot pay ends the run.
struct ChainSpec {
  std::vector<double> down, stay, up;
  std::vector<std::size_t> targets;
  std::vector<double> q;
  std::vector<std::size_t> charge_units;
  double unit = 1.0;  // power per battery unit
  std::size_t battery_units = 0;

  std::size_t k() const { return down.size(); }
};

inline void validate_chain(const ChainSpec& c) {
  const std::size_t k = c.k();
  if (k == 0) throw PreconditionError("chain: no states");
  if (c.stay.size() != k || c.up.size() != k || c.targets.size() != k || c.q.size() != k ||
      c.charge_units.size() != k)
    throw PreconditionError("chain: per-state vectors differ in length");
  for (std::size_t i = 0; i < k; ++i) {
    if (c.down[i] < 0.0 || c.stay[i] < 0.0 || c.up[i] < 0.0)
      throw PreconditionError("chain: negative transition probability");
    if (std::abs(c.down[i] + c.stay[i] + c.up[i] - 1.0) > 1e-12)
      throw PreconditionError("chain: row " + std::to_string(i + 1) + " is not stochastic");
    if (!(c.q[i] >= 0.0 && c.q[i] <= 1.0)) throw PreconditionError("chain: q outside [0,1]");
  }
}

struct ChainExpectation {
  // Indexed by start state - 1, for a full battery.
  std::vector<double> successes, power, rounds;
};

// First-step equations per battery level. Visits that cost nothing stay on
// the same level and are solved as one linear system; paid visits refer to
// lower levels that are already known.
inline ChainExpectation exact_chain_expectation(const ChainSpec& c) {
  validate_chain(c);
  const std::size_t k = c.k(), B = c.battery_units;
  // value[b * k + i] for three quantities.
  std::vector<double> S((B + 1) * k, 0.0), W((B + 1) * k, 0.0), N((B + 1) * k, 0.0);
  auto at = [k](std::size_t b, std::size_t i) { return b * k + i; };
  auto next_index = [k](std::size_t i, int dir) -> long {
    if (dir < 0) return i == 0 ? -1 : static_cast<long>(i) - 1;
    if (dir > 0) return i + 1 == k ? static_cast<long>(i) : static_cast<long>(i) + 1;
    return static_cast<long>(i);
  };
  for (std::size_t b = 0; b <= B; ++b) {
    std::vector<std::size_t> free_states;
    for (std::size_t i = 0; i < k; ++i) {
      if (c.charge_units[i] > b) continue;  // unaffordable: run ends, value 0
      if (c.charge_units[i] == 0) {
        free_states.push_back(i);
        continue;
      }
      const std::size_t nb = b - c.charge_units[i];
      const double reward = static_cast<double>(c.targets[i]) * c.q[i];
      const double cost = static_cast<double>(c.charge_units[i]) * c.unit;
      double s = reward, w = cost, n = 1.0;
      const double pr[3] = {c.down[i], c.stay[i], c.up[i]};
      for (int d = -1; d <= 1; ++d) {
        const long j = next_index(i, d);
        if (j < 0) continue;
        s += pr[d + 1] * S[at(nb, j)];
        w += pr[d + 1] * W[at(nb, j)];
        n += pr[d + 1] * N[at(nb, j)];
      }
      S[at(b, i)] = s;
      W[at(b, i)] = w;
      N[at(b, i)] = n;
    }
    if (free_states.empty()) continue;
    const auto m = static_cast<Eigen::Index>(free_states.size());
    std::vector<long> slot(k, -1);
    for (std::size_t x = 0; x < free_states.size(); ++x) slot[free_states[x]] = static_cast<long>(x);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::MatrixXd rhs(m, 3);
    for (Eigen::Index x = 0; x < m; ++x) {
      const std::size_t i = free_states[static_cast<std::size_t>(x)];
      rhs(x, 0) = static_cast<double>(c.targets[i]) * c.q[i];
      rhs(x, 1) = 0.0;
      rhs(x, 2) = 1.0;
      const double pr[3] = {c.down[i], c.stay[i], c.up[i]};
      for (int d = -1; d <= 1; ++d) {
        const long j = next_index(i, d);
        if (j < 0 || pr[d + 1] == 0.0) continue;
        if (slot[j] >= 0) {
          A(x, slot[j]) -= pr[d + 1];
        } else {
          rhs(x, 0) += pr[d + 1] * S[at(b, j)];
          rhs(x, 1) += pr[d + 1] * W[at(b, j)];
          rhs(x, 2) += pr[d + 1] * N[at(b, j)];
        }
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible())
      throw PreconditionError("chain: some cost-free states never terminate");
    const Eigen::MatrixXd sol = lu.solve(rhs);
    for (Eigen::Index x = 0; x < m; ++x) {
      const std::size_t i = free_states[static_cast<std::size_t>(x)];
      S[at(b, i)] = sol(x, 0);
      W[at(b, i)] = sol(x, 1);
      N[at(b, i)] = sol(x, 2);
    }
  }
  ChainExpectation e;
  for (std::size_t i = 0; i < k; ++i) {
    e.successes.push_back(S[at(B, i)]);
    e.power.push_back(W[at(B, i)]);
    e.rounds.push_back(N[at(B, i)]);
  }
  return e;
}

inline OracleResult exact_chain_oracle(const ChainSpec& c, std::size_t start) {
  if (start < 1 || start > c.k()) throw PreconditionError("chain oracle: start state out of range");
  const auto e = exact_chain_expectation(c);
  OracleResult res;
  res.kind = OracleKind::kChainExpectation;
  res.value = e.successes[start - 1];
  res.vector = e.successes;
  return res;
}

struct ChainSample {
  std::size_t trials = 0;
  double successes = 0.0, successes_se = 0.0;
  double power = 0.0, power_se = 0.0;
  double rounds = 0.0, rounds_se = 0.0;
};

// Independent Monte-Carlo estimate of the same chain, for cross-checking.
inline ChainSample chain_monte_carlo(const ChainSpec& c, std::size_t start, std::size_t trials,
                                     std::uint64_t seed, std::size_t max_visits = 1000000) {
  validate_chain(c);
  if (start < 1 || start > c.k()) throw PreconditionError("chain: start state out of range");
  if (trials < 2) throw PreconditionError("chain_monte_carlo: need at least two trials");
  SplitMix64 rng(mix64(seed) ^ 0x636861696eULL);
  double s1 = 0, s2 = 0, w1 = 0, w2 = 0, n1 = 0, n2 = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t i = start - 1, battery = c.battery_units, visits = 0;
    double s = 0.0, w = 0.0;
    while (visits < max_visits) {
      if (c.charge_units[i] > battery) break;
      battery -= c.charge_units[i];
      ++visits;
      w += static_cast<double>(c.charge_units[i]) * c.unit;
      if (c.targets[i] > 0 && c.q[i] > 0.0) {
        std::binomial_distribution<std::size_t> bin(c.targets[i], c.q[i]);
        s += static_cast<double>(bin(rng));
      }
      const double u = rng.uniform();
      if (u < c.down[i]) {
        if (i == 0) break;
        --i;
      } else if (u >= c.down[i] + c.stay[i] && i + 1 < c.k()) {
        ++i;
      }
    }
    const double n = static_cast<double>(visits);
    s1 += s; s2 += s * s;
    w1 += w; w2 += w * w;
    n1 += n; n2 += n * n;
  }
  const double T = static_cast<double>(trials);
  auto se = [T](double a, double b) {
    const double mean = a / T;
    return std::sqrt(std::max(0.0, (b / T - mean * mean) * T / (T - 1.0)) / T);
  };
  ChainSample out;
  out.trials = trials;
  out.successes = s1 / T;
  out.successes_se = se(s1, s2);
  out.power = w1 / T;
  out.power_se = se(w1, w2);
  out.rounds = n1 / T;
  out.rounds_se = se(n1, n2);
  return out;
}

// ---------------------------------------------------------------------------
// Offline broadcast optimum

inline constexpr std::size_t kMaxOracleUsers = 12;
inline constexpr std::size_t kMaxOracleStates = 8;

// Largest set of distinct users an omniscient sender can reach with total
// charge <= C_B. Reaching a user costs the cheapest ladder power that passes
// the affectance gate and decodes with every interferer silent, so the value
// bounds any per-delivery run from above. Subsets are enumerated
// exhaustively in the given user order.
inline OracleResult offline_optimal_broadcast(const Instance& inst,
                                              std::span<const std::size_t> order = {}) {
  if (!inst.broadcast) throw PreconditionError("offline broadcast: instance has no broadcast block");
  const auto& b = *inst.broadcast;
  const auto& cfg = inst.config;
  const std::size_t m = b.users.size();
  if (m > kMaxOracleUsers) throw PreconditionError("offline broadcast: at most 12 receivers");
  // Ladder and gate recomputed here so the oracle does not lean on the engine.
  std::vector<double> ladder;
  for (double p = cfg.C_B / static_cast<double>(m); p < cfg.C_B / cfg.s_cap; p *= cfg.lambda) {
    ladder.push_back(p);
    if (ladder.size() > kMaxOracleStates)
      throw PreconditionError("offline broadcast: at most 8 ladder states");
  }
  double mean_decay = 0.0;
  for (std::size_t u = 0; u < m; ++u) mean_decay += b.weights[u] * inst.space(b.sender, b.users[u]);
  const double gamma = cfg.oams_gamma > 0.0 ? cfg.oams_gamma : 1.0 / cfg.beta;
  auto gate = [&](double p) {
    double a = 0.0;
    for (const auto& it : b.interferers) a += it.power * mean_decay / (p * inst.space(it.node, b.sender));
    return a <= gamma;
  };
  std::vector<std::size_t> perm(m);
  for (std::size_t u = 0; u < m; ++u) perm[u] = u;
  if (!order.empty()) {
    if (order.size() != m) throw PreconditionError("offline broadcast: order must list every user");
    perm.assign(order.begin(), order.end());
  }

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(m, inf);
  for (std::size_t u = 0; u < m; ++u)
    for (double p : ladder) {
      if (!gate(p)) continue;
      const NodeId node = b.users[u];
      const double signal = p / inst.space(b.sender, node);
      const bool ok = cfg.noise == 0.0 || signal / cfg.noise >= cfg.beta;
      if (ok) {
        cost[u] = p;
        break;
      }
    }

  OracleResult res;
  res.kind = OracleKind::kOfflineBroadcast;
  res.digest = instance_digest(inst);
  std::size_t best = 0;
  std::uint32_t best_mask = 0;
  const double budget = cfg.C_B * (1.0 + 1e-12);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << m); ++mask) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t x = 0; x < m && total <= budget; ++x)
      if (mask >> x & 1u) {
        total += cost[perm[x]];
        ++count;
      }
    if (total <= budget && count > best) {
      best = count;
      best_mask = mask;
    }
  }
  for (std::size_t x = 0; x < m; ++x)
    if (best_mask >> x & 1u) res.subset.push_back(b.users[perm[x]]);
  std::sort(res.subset.begin(), res.subset.end());
  res.value = static_cast<double>(best);
  return res;
}

}  // namespace decaysim
