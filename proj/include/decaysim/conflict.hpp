#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaysim/config.hpp"
#include "decaysim/decayspace.hpp"
#include "decaysim/error.hpp"
#include "decaysim/instance.hpp"
#include "decaysim/sinrcore.hpp"

namespace decaysim {

// Smallest directed quasi-distance from an endpoint of `from` to an endpoint
// of `to`. This is the link-to-link distance q(from, to).
inline double cross_distance(const QuasiMetricSpace& space, const QuasiLink& from,
                             const QuasiLink& to) {
  return std::min({space(from.sender, to.sender), space(from.sender, to.receiver),
                   space(from.receiver, to.sender), space(from.receiver, to.receiver)});
}

struct PairIndependence {
  bool gamma1 = false;    // q(j,i) > gamma1 * q_i
  bool r_gamma1 = false;  // (R, gamma1)-independence
  double q_ji = 0.0;
  double q_ij = 0.0;
};

// Both predicates with the shorter link in the role of i. R is the power
// ratio the caller is reasoning about.
inline PairIndependence independent_pair(const QuasiMetricSpace& space,
                                         QuasiLink i, QuasiLink j, double R,
                                         double gamma1) {
  if (i.id == j.id) throw PreconditionError("independent_pair needs distinct links");
  if (j.length < i.length) std::swap(i, j);
  PairIndependence out;
  out.q_ji = cross_distance(space, j, i);
  out.q_ij = cross_distance(space, i, j);
  out.gamma1 = out.q_ji > gamma1 * i.length;
  out.r_gamma1 = out.q_ji > 0.5 * R * gamma1 * i.length ||
                 out.q_ji * out.q_ij > 0.25 * gamma1 * gamma1 * i.length * j.length;
  return out;
}

// R taken as the ratio of the two links' powers (larger over smaller).
inline PairIndependence independent_pair(const QuasiMetricSpace& space,
                                         const QuasiLink& i, const QuasiLink& j,
                                         const ScenarioConfig& cfg) {
  const double R = std::max(i.power, j.power) / std::min(i.power, j.power);
  return independent_pair(space, i, j, R, cfg.gamma1);
}

// ---------------------------------------------------------------------------
// Concentric disks around a node

enum class Endpoint { kSender, kReceiver };

// Radii rho_k = R*q*gamma1 + (k-1)*q for k = 1..K. D_1 is empty by
// convention, D_k = B_k \ B_{k-1} for k >= 2. Only the per-node disk index
// is stored because K can be very large.
struct DiskDecomposition {
  NodeId center = 0;
  double unit = 1.0;  // q
  double R = 1.0;
  double gamma1 = 1.0;
  std::size_t K = 2;
  std::vector<std::size_t> disk_of;  // 0 = in no disk

  double radius(std::size_t k) const {
    return R * unit * gamma1 + (static_cast<double>(k) - 1.0) * unit;
  }
  std::vector<NodeId> members(std::size_t k) const {
    std::vector<NodeId> out;
    for (NodeId z = 0; z < disk_of.size(); ++z)
      if (disk_of[z] == k) out.push_back(z);
    return out;
  }
  // Nonempty disks only, ascending k.
  std::map<std::size_t, std::vector<NodeId>> nonempty() const {
    std::map<std::size_t, std::vector<NodeId>> out;
    for (NodeId z = 0; z < disk_of.size(); ++z)
      if (disk_of[z] != 0) out[disk_of[z]].push_back(z);
    return out;
  }
  // Union of the disks (the annulus region used by the dense-ball search).
  std::vector<NodeId> covered() const {
    std::vector<NodeId> out;
    for (NodeId z = 0; z < disk_of.size(); ++z)
      if (disk_of[z] != 0) out.push_back(z);
    return out;
  }
};

inline DiskDecomposition disk_decomposition(const QuasiMetricSpace& space,
                                            NodeId center, double unit, double R,
                                            double gamma1, std::size_t K) {
  if (K < 2) throw PreconditionError("disk_decomposition needs K >= 2");
  if (!(unit > 0.0 && R > 0.0 && gamma1 > 0.0))
    throw PreconditionError("disk_decomposition needs positive q, R, gamma1");
  if (center >= space.size()) throw PreconditionError("center out of range");
  DiskDecomposition dd{center, unit, R, gamma1, K,
                       std::vector<std::size_t>(space.size(), 0)};
  const double inner = dd.radius(1);
  for (NodeId z = 0; z < space.size(); ++z) {
    const double d = space(center, z);
    if (z == center || d <= inner) continue;
    // Smallest k with d <= radius(k); correct the estimate for rounding.
    double est = std::ceil((d - inner) / unit) + 1.0;
    if (est > static_cast<double>(K) + 1.0) continue;
    auto k = static_cast<std::size_t>(std::max(2.0, est));
    while (k > 2 && d <= dd.radius(k - 1)) --k;
    while (k <= K && d > dd.radius(k)) ++k;
    if (k <= K) dd.disk_of[z] = k;
  }
  return dd;
}

// Decomposition around an endpoint of link i with q = q_i.
inline DiskDecomposition disk_decomposition(const QuasiMetricSpace& space,
                                            const QuasiLink& i, Endpoint endpoint,
                                            double R, const ScenarioConfig& cfg,
                                            std::size_t K) {
  const NodeId c = endpoint == Endpoint::kSender ? i.sender : i.receiver;
  return disk_decomposition(space, c, i.length, R, cfg.gamma1, K);
}

// Unit chosen so that B_1 holds only the center (R*gamma1*q is half the
// nearest neighbour distance) and K reaches the farthest node.
inline DiskDecomposition covering_decomposition(const QuasiMetricSpace& space,
                                                NodeId center, double R,
                                                double gamma1) {
  double near = std::numeric_limits<double>::infinity(), far = 0.0;
  for (NodeId z = 0; z < space.size(); ++z) {
    if (z == center) continue;
    near = std::min(near, space(center, z));
    far = std::max(far, space(center, z));
  }
  if (!std::isfinite(near)) return disk_decomposition(space, center, 1.0, R, gamma1, 2);
  const double unit = 0.5 * near / (R * gamma1);
  const double k = std::ceil((far - R * gamma1 * unit) / unit) + 2.0;
  return disk_decomposition(space, center, unit, R, gamma1,
                            static_cast<std::size_t>(std::max(2.0, k)));
}

// ---------------------------------------------------------------------------
// WAFF upper bounds

struct WaffBound {
  double bound = 0.0;      // (C_DI/C2) kappa gamma1^(m-2) (q_i/q) R^(m-1) (1 + 1/(R gamma1))
  double corollary = 0.0;  // (C1/C2) kappa gamma1^(m-2)
  double measured = 0.0;   // waff(S, i)
  double empirical_kappa = 0.0;  // measured / (bound / kappa)
  bool preconditions_ok = true;
  std::size_t pairwise_violations = 0;  // pairs in S that are not 1-independent
  std::size_t target_violations = 0;    // members not (R, gamma1)-independent of i
};

inline WaffBound waff_upper_bound(const QuasiMetricSpace& space,
                                  std::span<const QuasiLink> set, const QuasiLink& i,
                                  double unit, double R, const ScenarioConfig& cfg) {
  const double m = cfg.xi;
  WaffBound out;
  const double shape = std::pow(cfg.gamma1, m - 2.0) * (i.length / unit) *
                       std::pow(R, m - 1.0) * (1.0 + 1.0 / (R * cfg.gamma1));
  out.bound = cfg.kappa * (cfg.C_DI / cfg.C2) * shape;
  out.corollary = cfg.kappa * (cfg.C1 / cfg.C2) * std::pow(cfg.gamma1, m - 2.0);
  out.measured = waff(space, set, i);
  out.empirical_kappa = out.measured / ((cfg.C_DI / cfg.C2) * shape);
  for (std::size_t a = 0; a < set.size(); ++a) {
    for (std::size_t b = a + 1; b < set.size(); ++b)
      if (!independent_pair(space, set[a], set[b], 1.0, 1.0).gamma1)
        ++out.pairwise_violations;
    if (!independent_pair(space, i, set[a], R, cfg.gamma1).r_gamma1)
      ++out.target_violations;
  }
  out.preconditions_ok = out.pairwise_violations == 0 && out.target_violations == 0;
  return out;
}

// ---------------------------------------------------------------------------
// Dense balls and receive probability

// Greedy count of q/2-balls (centered at nodes) needed to cover B(center, r).
inline std::size_t cover_count(const QuasiMetricSpace& space, NodeId center,
                               double half_unit, double r) {
  auto pending = ball(space, {center, r});
  std::size_t count = 0;
  while (!pending.empty()) {
    // Pick the pending node whose half-unit ball covers most pending nodes.
    NodeId best = pending.front();
    std::size_t best_cover = 0;
    for (NodeId c : pending) {
      std::size_t cover = 0;
      for (NodeId z : pending)
        if (space(c, z) <= half_unit) ++cover;
      if (cover > best_cover) {
        best_cover = cover;
        best = c;
      }
    }
    std::erase_if(pending, [&](NodeId z) { return space(best, z) <= half_unit; });
    ++count;
  }
  return count;
}

struct DenseBall {
  bool found = false;
  double annulus_mass = 0.0;  // mass of the whole annulus (precondition)
  NodeId center = 0;          // w_k
  std::size_t disk = 0;       // k of w_k
  double radius = 0.0;        // q/2
  double mass = 0.0;
  bool mass_in_range = false;  // s <= mass <= 1/2
  bool sparse_surround = false;  // every x in B(w,q) \ B(w,q/2): mass(B(x,q/2)) <= zeta^m s
  double surround_max = 0.0;
  bool covering_mass = false;  // every j in B(w,q/2): mass(B(j, rho_k - delta1 q)) >= C1 / (2 chi)
  std::size_t chi = 0;
};

// Mass of B(c, r) restricted to `region` (a 0/1 mask).
inline double ball_mass(const QuasiMetricSpace& space, NodeId c, double r,
                        std::span<const double> probs, const std::vector<char>& region) {
  double m = 0.0;
  for (NodeId z = 0; z < space.size(); ++z)
    if (region[z] && space(c, z) <= r) m += probs[z];
  return m;
}

// Node-centered q/2-ball of largest mass inside the annulus of `dd`,
// preferring candidates whose mass lies in [s, 1/2].
inline DenseBall dense_ball(const QuasiMetricSpace& space, const DiskDecomposition& dd,
                            std::span<const double> probs, const ScenarioConfig& cfg) {
  if (probs.size() != space.size())
    throw PreconditionError("dense_ball: one probability per node required");
  DenseBall out;
  std::vector<char> region(space.size(), 0);
  for (NodeId z = 0; z < space.size(); ++z) {
    region[z] = dd.disk_of[z] != 0;
    if (region[z]) out.annulus_mass += probs[z];
  }
  if (out.annulus_mass < cfg.C1 / 2.0) return out;
  const double half = dd.unit / 2.0;
  std::optional<NodeId> best_in, best_any;
  double m_in = -1.0, m_any = -1.0;
  for (NodeId w = 0; w < space.size(); ++w) {
    if (!region[w]) continue;
    const double m = ball_mass(space, w, half, probs, region);
    if (m > m_any) { m_any = m; best_any = w; }
    if (m >= cfg.s && m <= 0.5 && m > m_in) { m_in = m; best_in = w; }
  }
  out.found = true;
  out.center = best_in ? *best_in : *best_any;
  out.mass = best_in ? m_in : m_any;
  out.mass_in_range = best_in.has_value();
  out.disk = dd.disk_of[out.center];
  out.radius = half;

  const double cap = std::pow(cfg.zeta, cfg.xi) * cfg.s;
  out.sparse_surround = true;
  for (NodeId x = 0; x < space.size(); ++x) {
    const double d = space(out.center, x);
    if (!(d > half && d <= dd.unit)) continue;
    const double m = ball_mass(space, x, half, probs, region);
    out.surround_max = std::max(out.surround_max, m);
    if (m > cap) out.sparse_surround = false;
  }

  const double rho = dd.radius(out.disk);
  out.chi = cover_count(space, dd.center, half, rho);
  const double need = cfg.C1 / (2.0 * static_cast<double>(out.chi));
  const double reach = std::max(0.0, rho - cfg.delta1 * dd.unit);
  out.covering_mass = true;
  std::vector<char> everywhere(space.size(), 1);
  for (NodeId j = 0; j < space.size(); ++j) {
    if (!region[j] || space(out.center, j) > half) continue;
    if (ball_mass(space, j, reach, probs, everywhere) < need) out.covering_mass = false;
  }
  return out;
}

// Lower bound (s/16) * (1/4)^((2 R gamma1 + 2k - 4)^xi * s) on the per-round
// receive probability near a dense ball.
inline double receive_probability_bound(double s, double R, double gamma1,
                                        double k, double xi) {
  if (!(s > 0.0 && s <= 0.5))
    throw PreconditionError("receive_probability_bound: s must lie in (0, 1/2]");
  if (!(k > 1.0)) throw PreconditionError("receive_probability_bound: k must exceed 1");
  const double base = 2.0 * R * gamma1 + 2.0 * k - 4.0;
  return (s / 16.0) * std::pow(0.25, std::pow(base, xi) * s);
}

// Strict inequality sum_{others in B} p > ((mu - delta)/lambda) sum_{receivers in B} p
// for B = B(b, radius).
inline bool density_dominant(const QuasiMetricSpace& space, NodeId b,
                             std::span<const NodeId> receivers,
                             std::span<const NodeId> others, double radius,
                             std::span<const double> probs, const ScenarioConfig& cfg) {
  for (NodeId x : receivers)
    if (std::find(others.begin(), others.end(), x) != others.end())
      throw PreconditionError("density_dominant: receivers and others overlap");
  auto mass = [&](std::span<const NodeId> set) {
    double m = 0.0;
    for (NodeId z : set)
      if (space(b, z) <= radius) m += probs[z];
    return m;
  };
  const double factor = (cfg.dd_mu - cfg.dd_delta) / cfg.dd_lambda;
  return mass(others) > factor * mass(receivers);
}

// ---------------------------------------------------------------------------
// Guards

enum class GuardRole { kReceiver, kSender };

struct GuardSet {
  NodeId target = 0;
  GuardRole role = GuardRole::kReceiver;
  double unit = 1.0;  // q of the decomposition
  std::vector<NodeId> guards;  // insertion order
  std::vector<std::size_t> group_of;  // disk (receiver) or shell (sender) per guard
  std::map<std::size_t, double> group_mass;
};

// Greedy guards: candidates are visited group by group (disks for a receiver,
// the q/2 and h*q/2 shells for a sender), ascending q(target, .) inside a
// group. A candidate joins when the set stays independent with respect to the
// target and its group's mass stays within C_D.
inline GuardSet build_guard_set(const QuasiMetricSpace& space, NodeId target,
                                GuardRole role, const DiskDecomposition& dd,
                                std::span<const double> probs, const ScenarioConfig& cfg) {
  if (probs.size() != space.size())
    throw PreconditionError("build_guard_set: one probability per node required");
  GuardSet gs;
  gs.target = target;
  gs.role = role;
  gs.unit = dd.unit;
  std::map<std::size_t, std::vector<NodeId>> groups;
  if (role == GuardRole::kReceiver) {
    groups = dd.nonempty();
  } else {
    for (NodeId z = 0; z < space.size(); ++z) {
      if (z == target) continue;
      const double d = space(target, z);
      if (d <= dd.unit / 2.0) groups[1].push_back(z);
      else if (d <= cfg.h * dd.unit / 2.0) groups[2].push_back(z);
    }
  }
  std::vector<NodeId> trial;
  for (auto& [k, nodes] : groups) {
    std::stable_sort(nodes.begin(), nodes.end(), [&](NodeId a, NodeId b) {
      return space(target, a) < space(target, b);
    });
    double mass = 0.0;
    for (NodeId w : nodes) {
      if (mass + probs[w] > cfg.C_D) continue;
      trial = gs.guards;
      trial.push_back(w);
      if (!independent_wrt(space, target, trial)) continue;
      gs.guards.push_back(w);
      gs.group_of.push_back(k);
      mass += probs[w];
    }
    gs.group_mass[k] = mass;
  }
  return gs;
}

struct GuardReport {
  std::vector<std::pair<NodeId, NodeId>> independence;  // conflicting guard pairs
  std::vector<NodeId> property1;      // z with min_w q(z,w) > q(z,target)
  std::vector<NodeId> guard_mass;     // non-guard b whose nearby guards carry > s/2
  std::vector<std::size_t> group_cap; // groups above C_D
  std::vector<NodeId> activation;     // guards with < s/2 mass in range (informational)
  bool ok() const {
    return independence.empty() && property1.empty() && guard_mass.empty() &&
           group_cap.empty();
  }
};

inline GuardReport verify_guard_property(const QuasiMetricSpace& space,
                                         const GuardSet& gs,
                                         std::span<const double> probs,
                                         const ScenarioConfig& cfg) {
  GuardReport rep;
  const NodeId v = gs.target;
  const auto& G = gs.guards;
  for (std::size_t a = 0; a < G.size(); ++a)
    for (std::size_t b = a + 1; b < G.size(); ++b)
      if (space(G[a], G[b]) <= space(v, G[a]) || space(G[b], G[a]) <= space(v, G[b]))
        rep.independence.emplace_back(G[a], G[b]);
  std::vector<char> is_guard(space.size(), 0);
  for (NodeId g : G) is_guard[g] = 1;
  for (NodeId z = 0; z < space.size(); ++z) {
    if (z == v || is_guard[z]) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (NodeId g : G) nearest = std::min(nearest, space(z, g));
    if (!(nearest <= space(z, v))) rep.property1.push_back(z);
  }
  if (!probs.empty()) {
    for (NodeId b = 0; b < space.size(); ++b) {
      if (b == v || is_guard[b]) continue;
      double m = 0.0;
      bool any = false;
      for (NodeId g : G)
        if (space(b, g) <= gs.unit) {
          any = true;
          m += probs[g];
        }
      if (any && m > cfg.s / 2.0) rep.guard_mass.push_back(b);
    }
    for (NodeId g : G) {
      double m = 0.0;
      for (NodeId z = 0; z < space.size(); ++z)
        if (z != g && space(g, z) <= gs.unit) m += probs[z];
      if (m < cfg.s / 2.0) rep.activation.push_back(g);
    }
  }
  for (const auto& [k, m] : gs.group_mass)
    if (m > cfg.C_D) rep.group_cap.push_back(k);
  return rep;
}

}  // namespace decaysim
