#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "decaysim/config.hpp"
#include "decaysim/decayspace.hpp"
#include "decaysim/error.hpp"
#include "decaysim/instance.hpp"

namespace decaysim {

inline constexpr double kInfiniteSinr = std::numeric_limits<double>::infinity();

// SINR of link i against `concurrent` transmitters:
//   (P_i / q_i) / (sum_j P_j / q(s_j, r_i) + N).
// Returns +inf when there is neither interference nor noise.
inline double sinr(const QuasiMetricSpace& space, const QuasiLink& i,
                   std::span<const QuasiLink> concurrent, double noise) {
  double interference = 0.0;
  for (const auto& j : concurrent) {
    if (j.id == i.id)
      throw PreconditionError("link " + std::to_string(i.id) +
                              " listed among its own interferers");
    const double d = space(j.sender, i.receiver);
    if (!(d > 0.0))
      throw PreconditionError("interferer " + std::to_string(j.id) +
                              " is co-located with receiver of link " +
                              std::to_string(i.id));
    interference += j.power / d;
  }
  const double denom = interference + noise;
  if (denom == 0.0) return kInfiniteSinr;
  return (i.power / i.length) / denom;
}

inline double sinr(const QuasiMetricSpace& space, const QuasiLink& i,
                   std::span<const QuasiLink> concurrent, const ScenarioConfig& cfg) {
  return sinr(space, i, concurrent, cfg.noise);
}

// Every member decodes with SINR >= beta while all members transmit.
inline bool sinr_feasible(const QuasiMetricSpace& space,
                          std::span<const QuasiLink> set, const ScenarioConfig& cfg) {
  std::vector<QuasiLink> others;
  others.reserve(set.size());
  for (std::size_t a = 0; a < set.size(); ++a) {
    others.clear();
    for (std::size_t b = 0; b < set.size(); ++b)
      if (b != a) others.push_back(set[b]);
    if (sinr(space, set[a], others, cfg.noise) < cfg.beta) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Power conditions

enum class PowerCondition {
  kNoiseFloor,     // P_v >= c * beta * N * q_v
  kMonotonePower,  // q_v >= q_w  =>  P_v <= P_w
  kMonotoneSignal, // q_v >= q_w  =>  P_v / q_v <= P_w / q_w
};

inline const char* to_string(PowerCondition c) {
  switch (c) {
    case PowerCondition::kNoiseFloor: return "noise_floor";
    case PowerCondition::kMonotonePower: return "monotone_power";
    case PowerCondition::kMonotoneSignal: return "monotone_signal";
  }
  return "unknown";
}

struct PowerViolation {
  PowerCondition kind;
  std::size_t v = 0;  // link ids; w == v for the noise floor
  std::size_t w = 0;
};

struct PowerConditionReport {
  std::vector<PowerViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

// `rel_tol` absorbs rounding in powers computed from lengths.
inline PowerConditionReport power_conditions_check(std::span<const QuasiLink> links,
                                                   const ScenarioConfig& cfg,
                                                   double rel_tol = 1e-12) {
  PowerConditionReport rep;
  const double scale = 1.0 + rel_tol;
  for (const auto& v : links)
    if (v.power * scale < cfg.c_power * cfg.beta * cfg.noise * v.length)
      rep.violations.push_back({PowerCondition::kNoiseFloor, v.id, v.id});
  for (const auto& v : links)
    for (const auto& w : links) {
      if (v.id == w.id || v.length < w.length) continue;
      if (v.power > w.power * scale)
        rep.violations.push_back({PowerCondition::kMonotonePower, v.id, w.id});
      if (v.power / v.length > (w.power / w.length) * scale)
        rep.violations.push_back({PowerCondition::kMonotoneSignal, v.id, w.id});
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Affectance

// Max over the four endpoint-to-endpoint ratios R * q_i / d, R = P_j / P_i.
inline double affectance(const QuasiMetricSpace& space, const QuasiLink& j,
                         const QuasiLink& i) {
  if (j.id == i.id) throw PreconditionError("affectance of a link on itself");
  const double d = std::min({space(j.sender, i.receiver), space(j.receiver, i.receiver),
                             space(j.sender, i.sender), space(j.receiver, i.sender)});
  if (!(d > 0.0))
    throw PreconditionError("links " + std::to_string(j.id) + " and " +
                            std::to_string(i.id) + " share an endpoint");
  return (j.power / i.power) * i.length / d;
}

// The scheduling loop's per-pair form min(1, c * p_j * q_i / (p_i * q(s_j, r_i))),
// built from transmission probabilities rather than powers.
inline double capped_pair_affectance(const QuasiMetricSpace& space,
                                     const QuasiLink& j, const QuasiLink& i,
                                     double c = 1.0) {
  if (j.id == i.id) throw PreconditionError("affectance of a link on itself");
  const double d = space(j.sender, i.receiver);
  if (!(d > 0.0))
    throw PreconditionError("links " + std::to_string(j.id) + " and " +
                            std::to_string(i.id) + " share an endpoint");
  if (!(i.prob > 0.0)) throw PreconditionError("target link has zero probability");
  return std::min(1.0, c * j.prob * i.length / (i.prob * d));
}

struct AffectanceMatrix {
  std::size_t size = 0;
  std::vector<double> a;  // row j, column i: affectance of j on i
  double operator()(std::size_t j, std::size_t i) const { return a[j * size + i]; }
};

inline AffectanceMatrix affectance_matrix(const QuasiMetricSpace& space,
                                          std::span<const QuasiLink> links) {
  AffectanceMatrix m{links.size(), std::vector<double>(links.size() * links.size(), 0.0)};
  for (std::size_t j = 0; j < links.size(); ++j)
    for (std::size_t i = 0; i < links.size(); ++i)
      if (i != j) m.a[j * m.size + i] = affectance(space, links[j], links[i]);
  return m;
}

namespace detail {

template <class PairFn>
double weighted_average(std::span<const QuasiLink> set, const QuasiLink& i,
                        PairFn&& pair) {
  if (set.empty()) return 0.0;
  double num = 0.0, den = 0.0;
  for (const auto& j : set) {
    if (j.id == i.id) throw PreconditionError("target link belongs to the set");
    num += j.prob * pair(j);
    den += j.prob;
  }
  if (!(den > 0.0))
    throw PreconditionError("interference set has zero total probability");
  return num / den;
}

}  // namespace detail

// Probability-weighted average affectance of S on i; 0 for the empty set.
inline double waff(const QuasiMetricSpace& space, std::span<const QuasiLink> set,
                   const QuasiLink& i) {
  return detail::weighted_average(
      set, i, [&](const QuasiLink& j) { return affectance(space, j, i); });
}

inline double waff_capped(const QuasiMetricSpace& space,
                          std::span<const QuasiLink> set, const QuasiLink& i,
                          double c = 1.0) {
  return detail::weighted_average(set, i, [&](const QuasiLink& j) {
    return capped_pair_affectance(space, j, i, c);
  });
}

struct GateResult {
  bool dp_feasible = false;  // waff <= threshold
  bool gdp_lower = false;    // waff >= delta1 / C_DI
  double waff = 0.0;
  double threshold = 0.0;
};

inline GateResult dp_feasible_gate(const QuasiMetricSpace& space,
                                   std::span<const QuasiLink> set, const QuasiLink& i,
                                   const ScenarioConfig& cfg) {
  GateResult g;
  g.waff = waff(space, set, i);
  g.threshold = cfg.gate_threshold();
  g.dp_feasible = g.waff <= g.threshold;
  g.gdp_lower = g.waff >= cfg.delta1 / cfg.C_DI;
  return g;
}

// ---------------------------------------------------------------------------
// Acknowledgements

// Power for the reverse transmission r_i -> s_i while j's traffic is around:
//   P_i* = P_i * (q_i* / q_i) * (q_ji / q_ji*)
// with q_i* = q(r_i, s_i), q_ji = q(s_j, r_i) and q_ji* = q(r_i, s_j).
// Written as a product of ratios so a symmetric space returns P_i exactly.
inline double ack_power(const QuasiMetricSpace& space, const QuasiLink& i,
                        const QuasiLink& j) {
  const double q_rev = space(i.receiver, i.sender);
  const double q_ji = space(j.sender, i.receiver);
  const double q_ji_rev = space(i.receiver, j.sender);
  if (!(i.length > 0.0 && q_rev > 0.0 && q_ji > 0.0 && q_ji_rev > 0.0))
    throw PreconditionError("ack_power: zero quasi-distance between links " +
                            std::to_string(i.id) + " and " + std::to_string(j.id));
  return i.power * (q_rev / i.length) * (q_ji / q_ji_rev);
}

// Ack power with no reference interferer: only the link's own asymmetry.
inline double ack_power_isolated(const QuasiMetricSpace& space, const QuasiLink& i) {
  const double q_rev = space(i.receiver, i.sender);
  if (!(i.length > 0.0 && q_rev > 0.0))
    throw PreconditionError("ack_power: zero link quasi-length");
  return i.power * (q_rev / i.length);
}

// The acknowledgement link r_i -> s_i carrying power `power`.
inline QuasiLink reverse_link(const QuasiMetricSpace& space, const QuasiLink& i,
                              double power) {
  QuasiLink rev = i;
  rev.sender = i.receiver;
  rev.receiver = i.sender;
  rev.length = space(i.receiver, i.sender);
  rev.power = power;
  return rev;
}

struct AckAffectance {
  double reverse = 0.0;  // affectance of j* on i* under ack powers
  double forward = 0.0;  // affectance of j on i under data powers
  double ratio = 0.0;    // reverse / forward
};

inline AckAffectance ack_affectance_ratio(const QuasiMetricSpace& space,
                                          const QuasiLink& i, const QuasiLink& j) {
  const auto i_rev = reverse_link(space, i, ack_power(space, i, j));
  const auto j_rev = reverse_link(space, j, ack_power(space, j, i));
  AckAffectance out;
  out.forward = affectance(space, j, i);
  out.reverse = affectance(space, j_rev, i_rev);
  out.ratio = out.reverse / out.forward;
  return out;
}

}  // namespace decaysim
