#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "decaysim/config.hpp"
#include "decaysim/error.hpp"
#include "decaysim/instance.hpp"
#include "decaysim/random.hpp"

namespace decaysim {

// ---------------------------------------------------------------------------
// Power ladder. States are 1-based as in the analysis; p[0] is state 1.

struct PowerLadder {
  double C_B = 0.0;
  std::size_t n = 1;  // users
  double lambda = 2.0;
  double s_cap = 1.0;
  std::vector<double> p;

  std::size_t k() const { return p.size(); }
  double power(std::size_t state) const {
    if (state < 1 || state > p.size()) throw PreconditionError("ladder state out of range");
    return p[state - 1];
  }
};

// p_1 = C_B / n, p_i = lambda p_{i-1}; k is the last state with
// p_k < C_B / s_cap, and it must also clear C_B / (lambda s_cap).
inline PowerLadder power_ladder(const ScenarioConfig& cfg, std::size_t n) {
  if (!(cfg.lambda > 1.0)) throw PreconditionError("power_ladder: lambda must exceed 1");
  if (n < 1) throw PreconditionError("power_ladder: need at least one user");
  if (!(cfg.C_B > 0.0)) throw PreconditionError("power_ladder: C_B must be positive");
  if (!(cfg.s_cap > 0.0)) throw PreconditionError("power_ladder: s_cap must be positive");
  PowerLadder lad;
  lad.C_B = cfg.C_B;
  lad.n = n;
  lad.lambda = cfg.lambda;
  lad.s_cap = cfg.s_cap;
  const double hi = cfg.C_B / cfg.s_cap;
  const double lo = hi / cfg.lambda;
  double p = cfg.C_B / static_cast<double>(n);
  while (p < hi) {
    lad.p.push_back(p);
    p *= cfg.lambda;
  }
  if (lad.p.empty() || !(lad.p.back() > lo))
    throw PreconditionError("power_ladder: no state lies in (C_B/(lambda s_cap), C_B/s_cap) = (" +
                            std::to_string(lo) + ", " + std::to_string(hi) +
                            "); p_1 = " + std::to_string(cfg.C_B / static_cast<double>(n)));
  return lad;
}

inline PowerLadder power_ladder(const ScenarioConfig& cfg) {
  return power_ladder(cfg, static_cast<std::size_t>(std::max(1, cfg.n_users)));
}

// ---------------------------------------------------------------------------
// Step rule

// Receivers targeted at power p: floor(r p n / C_B), at least one.
inline std::size_t target_count(double p, const PowerLadder& lad, const ScenarioConfig& cfg) {
  const double raw = cfg.r * p * static_cast<double>(lad.n) / lad.C_B;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

// Next state after a round with `successes` acknowledged receivers. The
// comparisons carry a relative slack so 20 * 1.05 counts as 21.
inline std::size_t sp_step(std::size_t state, double successes, std::size_t k,
                           const ScenarioConfig& cfg) {
  if (state < 1 || state > k) throw PreconditionError("sp_step: state out of range");
  const double slack = 1e-9 * std::max(1.0, cfg.r);
  if (successes >= cfg.r * (1.0 + cfg.epsilon / 2.0) - slack) return state > 1 ? state - 1 : 1;
  if (successes <= cfg.r * (1.0 - cfg.epsilon / 2.0) + slack) return state < k ? state + 1 : k;
  return state;
}

// ---------------------------------------------------------------------------
// Broadcast model

inline const BroadcastSpec& broadcast_of(const Instance& inst) {
  if (!inst.broadcast) throw PreconditionError("instance has no broadcast block");
  return *inst.broadcast;
}

inline void require_symmetric(const Instance& inst) {
  if (!inst.space.is_symmetric())
    throw PreconditionError("broadcast engine needs a symmetric (metric) instance");
}

// Arrival-weighted mean sender-to-user decay: the typical link length the
// sender plans for, since it cannot know which user comes online.
inline double mean_user_decay(const Instance& inst) {
  const auto& b = broadcast_of(inst);
  double acc = 0.0;
  for (std::size_t u = 0; u < b.users.size(); ++u)
    acc += b.weights[u] * inst.space(b.sender, b.users[u]);
  return acc;
}

// Affectance of the background transmitters on a transmission at power p:
// sum_b P_b * l / (p * q(b, sender)) with l the mean user decay.
inline double broadcast_affectance(const Instance& inst, double p) {
  const auto& b = broadcast_of(inst);
  const double l = mean_user_decay(inst);
  double a = 0.0;
  for (const auto& it : b.interferers) a += it.power * l / (p * inst.space(it.node, b.sender));
  return a;
}

// SINR at user index u (into b.users) for power p with the interferers in
// `active` (bitmask over b.interferers) transmitting.
inline double user_sinr(const Instance& inst, std::size_t u, double p, std::uint64_t active) {
  const auto& b = broadcast_of(inst);
  const NodeId node = b.users[u];
  double interference = 0.0;
  for (std::size_t k = 0; k < b.interferers.size(); ++k)
    if (active >> k & 1u)
      interference += b.interferers[k].power / inst.space(b.interferers[k].node, node);
  const double denom = interference + inst.config.noise;
  const double signal = p / inst.space(b.sender, node);
  return denom == 0.0 ? std::numeric_limits<double>::infinity() : signal / denom;
}

inline constexpr std::size_t kMaxExactInterferers = 16;

// Exact per-receiver success probability at power p: arrival-weighted over
// users and summed over every interferer activity pattern.
inline double success_probability(const Instance& inst, double p) {
  const auto& b = broadcast_of(inst);
  const std::size_t m = b.interferers.size();
  if (m > kMaxExactInterferers)
    throw CapacityError("success_probability: at most 16 interferers for exact enumeration");
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double pr = 1.0;
    for (std::size_t k = 0; k < m; ++k)
      pr *= (mask >> k & 1u) ? b.interferers[k].activity : 1.0 - b.interferers[k].activity;
    if (pr == 0.0) continue;
    for (std::size_t u = 0; u < b.users.size(); ++u)
      if (user_sinr(inst, u, p, mask) >= inst.config.beta) total += pr * b.weights[u];
  }
  return std::min(1.0, total);  // the weights sum to 1 only up to rounding
}

inline std::vector<double> success_probabilities(const Instance& inst, const PowerLadder& lad) {
  std::vector<double> q;
  for (double p : lad.p) q.push_back(success_probability(inst, p));
  return q;
}

// Frequency estimate over `trials` independent single-receiver draws; used
// when exact enumeration is out of reach or as a calibration phase.
inline double estimate_success_probability(const Instance& inst, double p, std::size_t trials,
                                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Ideal power set

struct IdealPowerSet {
  std::vector<std::size_t> members;  // 1-based states
  std::size_t s = 0;                 // 0 when no state satisfies the bracketing
  std::string diagnostic;

  bool empty() const { return members.empty(); }
  bool contains(std::size_t state) const {
    return std::find(members.begin(), members.end(), state) != members.end();
  }
  // min over members of min(|i - s|, |i - s + 1|)
  std::size_t distance(std::size_t state) const {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t m : members) {
      const auto i = static_cast<long long>(state);
      const auto sm = static_cast<long long>(m);
      best = std::min<std::size_t>(
          best, static_cast<std::size_t>(std::min(std::llabs(i - sm), std::llabs(i - sm + 1))));
    }
    return best;
  }
};

// s is the first state with p_s >= C_B / (n q_s) (so p_{s-1} < C_B / (n q_{s-1})
// holds by minimality). Members: i <= s, affectance <= 1/beta and
// q_i > (1 - eps) C_B / (p_i n).
inline IdealPowerSet ideal_power_set(const PowerLadder& lad, const std::vector<double>& q,
                                     const std::vector<double>& affectance,
                                     const ScenarioConfig& cfg) {
  if (q.size() != lad.k() || affectance.size() != lad.k())
    throw PreconditionError("ideal_power_set: one q and one affectance per state");
  for (double v : q)
    if (!(v >= 0.0 && v <= 1.0)) throw PreconditionError("ideal_power_set: q outside [0,1]");
  IdealPowerSet pid;
  const double n = static_cast<double>(lad.n);
  for (std::size_t i = 1; i <= lad.k(); ++i) {
    const double qi = q[i - 1];
    if (qi > 0.0 && lad.power(i) >= lad.C_B / (n * qi)) {
      pid.s = i;
      break;
    }
  }
  if (pid.s == 0) {
    pid.diagnostic = "no state satisfies p_s >= C_B/(n q_s)";
    return pid;
  }
  for (std::size_t i = 1; i <= pid.s; ++i) {
    const double p = lad.power(i);
    if (affectance[i - 1] <= 1.0 / cfg.beta && q[i - 1] > (1.0 - cfg.epsilon) * lad.C_B / (p * n))
      pid.members.push_back(i);
  }
  if (pid.members.empty()) pid.diagnostic = "no state at or below s meets the membership conditions";
  return pid;
}

inline std::vector<double> broadcast_affectances(const Instance& inst, const PowerLadder& lad) {
  std::vector<double> a;
  for (double p : lad.p) a.push_back(broadcast_affectance(inst, p));
  return a;
}

// PID from exact success probabilities.
inline IdealPowerSet ideal_power_set(const Instance& inst, const PowerLadder& lad) {
  return ideal_power_set(lad, success_probabilities(inst, lad), broadcast_affectances(inst, lad),
                         inst.config);
}

// ---------------------------------------------------------------------------
// Bounds

struct TransitionBound {
  double value = 0.0;
  bool vacuous = false;
};

// 1 - (1/(eps^2 r) - 1/(eps r)).
inline TransitionBound transition_probability_bound(double eps, double r) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("transition bound: eps must lie in (0,1)");
  if (!(r >= 1.0)) throw PreconditionError("transition bound: r must be >= 1");
  TransitionBound t;
  t.value = 1.0 - (1.0 / (eps * eps * r) - 1.0 / (eps * r));
  t.vacuous = !(t.value > 0.0 && t.value <= 1.0);
  return t;
}

struct ExpectationBounds {
  double b = 0.0;
  double successes = 0.0;
  double power = 0.0;
  bool vacuous = false;
};

// b = (1/(eps^2 r) - 2/(eps r)) (1 - lambda^2); the denominators carry
// xi (lambda - 1 + b) with xi = s_cap.
inline ExpectationBounds expectation_bounds(const ScenarioConfig& cfg, std::size_t n) {
  const double eps = cfg.epsilon, r = cfg.r, a = cfg.lambda, xi = cfg.s_cap;
  ExpectationBounds e;
  e.b = (1.0 / (eps * eps * r) - 2.0 / (eps * r)) * (1.0 - a * a);
  const double den = xi * (a - 1.0 + e.b);
  e.vacuous = !(a - 1.0 + e.b > 0.0);
  if (!e.vacuous) {
    e.successes = r * static_cast<double>(n) * a / den;
    e.power = r * (1.0 + eps / 2.0) * a * cfg.C_B / den;
  }
  return e;
}

// ---------------------------------------------------------------------------
// Engine

struct ChainRecord {
  std::size_t round = 0;
  std::size_t state = 0;  // state used in this round
  double power = 0.0;
  std::size_t targets = 0;
  std::size_t decoded = 0;    // receivers that decoded
  std::size_t successes = 0;  // decoded and paid for
  double charged = 0.0;
  double battery = 0.0;  // remaining after the round
  bool gate_ok = true;
  std::size_t shadow = 0;  // coupled chain state before the round
};

enum class HaltReason { kRoundBudget, kBatteryExhausted, kUnaffordable };

inline const char* to_string(HaltReason h) {
  switch (h) {
    case HaltReason::kRoundBudget: return "round_budget";
    case HaltReason::kBatteryExhausted: return "battery_exhausted";
    case HaltReason::kUnaffordable: return "unaffordable";
  }
  return "unknown";
}

struct OamsResult {
  PowerLadder ladder;
  std::vector<ChainRecord> trace;
  std::size_t final_state = 0;
  std::size_t final_shadow = 0;
  std::size_t delivered = 0;        // distinct users reached
  std::size_t successes = 0;        // charged deliveries, repeats included
  double consumed = 0.0;
  HaltReason halt = HaltReason::kRoundBudget;
  std::vector<std::size_t> transitions_up, transitions_down, transitions_stay;  // per state
};

struct OamsOptions {
  bool record_trace = true;
  const IdealPowerSet* pid = nullptr;  // enables the shadow chain
  std::optional<std::size_t> start_state;  // default: top of the ladder
  std::optional<std::size_t> max_rounds;   // default: config oams_max_rounds
};

namespace detail {

// Largest m with m * p <= battery in floating point, checked exactly.
inline std::size_t affordable(double battery, double p) {
  if (!(battery >= p)) return 0;
  auto m = static_cast<std::size_t>(std::floor(battery / p));
  while (m > 0 && static_cast<double>(m) * p > battery) --m;
  while (static_cast<double>(m + 1) * p <= battery) ++m;
  return m;
}

inline std::size_t pick_user(const BroadcastSpec& b, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < b.weights.size(); ++k) {
    acc += b.weights[k];
    if (u < acc) return k;
  }
  return b.weights.size() - 1;
}

struct RoundDraw {
  std::size_t targets = 0;
  std::size_t successes = 0;
  std::vector<std::size_t> reached;  // user indices in arrival order
};

// One SP round at power p: draw the interferer pattern and the online
// receivers, then count decodes.
inline RoundDraw broadcast_round(const Instance& inst, double p, std::size_t targets,
                                 std::uint64_t seed, std::uint64_t round) {
  const auto& b = broadcast_of(inst);
  std::uint64_t active = 0;
  for (std::size_t k = 0; k < b.interferers.size() && k < 64; ++k)
    if (keyed_uniform(seed, k, round, Draw::kInterferer) < b.interferers[k].activity)
      active |= std::uint64_t{1} << k;
  RoundDraw d;
  d.targets = targets;
  for (std::size_t t = 0; t < targets; ++t) {
    const std::size_t u = pick_user(b, keyed_uniform(seed, t, round, Draw::kReceiverPick));
    if (user_sinr(inst, u, p, active) >= inst.config.beta) {
      ++d.successes;
      d.reached.push_back(u);
    }
  }
  return d;
}

}  // namespace detail

inline double estimate_success_probability(const Instance& inst, double p, std::size_t trials,
                                           std::uint64_t seed) {
  if (trials == 0) throw PreconditionError("estimate_success_probability: trials must be > 0");
  std::size_t ok = 0;
  for (std::size_t t = 0; t < trials; ++t) ok += detail::broadcast_round(inst, p, 1, seed, t).successes;
  return static_cast<double>(ok) / static_cast<double>(trials);
}

inline OamsResult oams_run(const Instance& inst, std::uint64_t seed, const OamsOptions& opts = {}) {
  const auto& cfg = inst.config;
  cfg.validate();
  require_symmetric(inst);
  const auto& b = broadcast_of(inst);
  if (b.interferers.size() > 64) throw CapacityError("oams_run: at most 64 interferers");
  OamsResult res;
  res.ladder = power_ladder(cfg, b.users.size());
  const auto& lad = res.ladder;
  const std::size_t k = lad.k();
  res.transitions_up.assign(k + 1, 0);
  res.transitions_down.assign(k + 1, 0);
  res.transitions_stay.assign(k + 1, 0);

  std::size_t state = opts.start_state.value_or(k);
  if (state < 1 || state > k) throw PreconditionError("oams_run: start state out of range");
  const std::size_t rounds =
      opts.max_rounds.value_or(static_cast<std::size_t>(std::max(0, cfg.oams_max_rounds)));
  const IdealPowerSet* pid = opts.pid && !opts.pid->empty() ? opts.pid : nullptr;
  std::size_t shadow = pid ? pid->distance(state) : 0;
  bool entered_pid = pid && pid->contains(state);

  double battery = cfg.C_B;
  std::vector<char> reached(b.users.size(), 0);
  const double gamma = cfg.broadcast_gamma();
  for (std::size_t t = 0; t < rounds; ++t) {
    const double p = lad.power(state);
    if (battery < p && cfg.charge_rule != ChargeRule::kPerDelivery) {
      res.halt = HaltReason::kUnaffordable;
      break;
    }
    ChainRecord rec;
    rec.round = t;
    rec.state = state;
    rec.power = p;
    rec.shadow = shadow;
    rec.targets = target_count(p, lad, cfg);
    rec.gate_ok = broadcast_affectance(inst, p) <= gamma;
    bool exhausted = false;
    std::size_t next = state;
    if (rec.gate_ok) {
      auto d = detail::broadcast_round(inst, p, rec.targets, seed, t);
      rec.decoded = d.successes;
      // Charged deliveries are capped by what the battery can still pay.
      std::size_t paid = d.successes;
      switch (cfg.charge_rule) {
        case ChargeRule::kPerDelivery: {
          const auto afford = detail::affordable(battery, p);
          if (afford < paid) {
            paid = afford;
            exhausted = true;
          }
          rec.charged = static_cast<double>(paid) * p;
          break;
        }
        case ChargeRule::kPerAttempt: {
          const auto afford = detail::affordable(battery, p);
          const std::size_t attempts = std::min(afford, rec.targets);
          if (attempts < rec.targets) exhausted = true;
          // Receivers beyond the affordable attempts never hear the message.
          paid = std::min(paid, attempts);
          rec.charged = static_cast<double>(attempts) * p;
          break;
        }
        case ChargeRule::kPerRound:
          rec.charged = p;
          break;
      }
      rec.successes = paid;
      // charged <= battery holds exactly, so the battery never goes negative
      // and consumed never exceeds C_B.
      battery -= rec.charged;
      for (std::size_t x = 0; x < paid; ++x) reached[d.reached[x]] = 1;
      res.successes += paid;
      res.consumed = cfg.C_B - battery;
      next = sp_step(state, static_cast<double>(d.successes), k, cfg);
    }
    rec.battery = battery;
    if (next < state) ++res.transitions_down[state];
    else if (next > state) ++res.transitions_up[state];
    else ++res.transitions_stay[state];

    // Shadow chain: one step toward PID moves it down, anything else up;
    // zero is absorbing.
    if (pid && !entered_pid) {
      if (pid->distance(next) < pid->distance(state)) shadow = shadow > 0 ? shadow - 1 : 0;
      else if (shadow > 0) ++shadow;
    }
    state = next;
    if (pid && pid->contains(state)) entered_pid = true;
    if (opts.record_trace) res.trace.push_back(rec);
    if (exhausted) {
      res.halt = HaltReason::kBatteryExhausted;
      break;
    }
    if (battery < lad.p.front()) {
      res.halt = HaltReason::kUnaffordable;
      break;
    }
  }
  res.final_state = state;
  res.final_shadow = shadow;
  res.delivered = static_cast<std::size_t>(std::count(reached.begin(), reached.end(), 1));
  return res;
}

// ---------------------------------------------------------------------------
// Coupling check

struct CouplingReport {
  bool clean = true;
  bool vacuous = false;  // start state already in PID
  std::size_t checked = 0;
  std::size_t first_violation = 0;  // round index when !clean
  std::string detail;
};

// Verifies j_t >= dist(i_t, PID) for every t before the chain first enters
// PID. `states` and `shadows` hold (i_t, j_t) for t = 0, 1, ...
inline CouplingReport coupling_check(const std::vector<std::size_t>& states,
                                     const std::vector<std::size_t>& shadows,
                                     const IdealPowerSet& pid) {
  if (states.size() != shadows.size())
    throw PreconditionError("coupling_check: one shadow state per chain state");
  CouplingReport rep;
  if (pid.empty()) {
    rep.vacuous = true;
    rep.detail = "PID empty";
    return rep;
  }
  if (!states.empty() && pid.contains(states.front())) {
    rep.vacuous = true;
    return rep;
  }
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (t > 0 && pid.contains(states[t - 1])) break;
    ++rep.checked;
    const std::size_t need = pid.distance(states[t]);
    if (shadows[t] < need) {
      rep.clean = false;
      rep.first_violation = t;
      rep.detail = "j_t = " + std::to_string(shadows[t]) + " < " + std::to_string(need);
      return rep;
    }
  }
  return rep;
}

inline CouplingReport coupling_check(const OamsResult& run, const IdealPowerSet& pid) {
  std::vector<std::size_t> states, shadows;
  for (const auto& r : run.trace) {
    states.push_back(r.state);
    shadows.push_back(r.shadow);
  }
  states.push_back(run.final_state);
  shadows.push_back(run.final_shadow);
  return coupling_check(states, shadows, pid);
}

// ---------------------------------------------------------------------------
// Single-round measurements

struct TransitionFrequency {
  std::size_t trials = 0;
  std::size_t up = 0, down = 0, stay = 0;
};

// Independent single SP rounds from a fixed state (battery ignored).
inline TransitionFrequency transition_frequency(const Instance& inst, std::size_t state,
                                                std::size_t trials, std::uint64_t seed) {
  require_symmetric(inst);
  const auto& cfg = inst.config;
  const auto lad = power_ladder(cfg, broadcast_of(inst).users.size());
  const double p = lad.power(state);
  TransitionFrequency f;
  f.trials = trials;
  const std::size_t targets = target_count(p, lad, cfg);
  for (std::size_t t = 0; t < trials; ++t) {
    const auto d = detail::broadcast_round(inst, p, targets, seed, t);
    const std::size_t next = sp_step(state, static_cast<double>(d.successes), lad.k(), cfg);
    if (next < state) ++f.down;
    else if (next > state) ++f.up;
    else ++f.stay;
  }
  return f;
}

}  // namespace decaysim
