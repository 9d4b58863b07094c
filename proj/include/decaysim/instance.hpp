#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "decaysim/config.hpp"
#include "decaysim/decayspace.hpp"
#include "decaysim/error.hpp"
#include "decaysim/random.hpp"

namespace decaysim {

// Directed sender->receiver pair. `length` caches q(sender, receiver).
struct QuasiLink {
  std::size_t id = 0;
  NodeId sender = 0;
  NodeId receiver = 0;
  double length = 0.0;
  double power = 1.0;
  double prob = 1.0;  // transmission probability ("color")
  bool active = true;
};

inline QuasiLink make_link(const QuasiMetricSpace& space, std::size_t id,
                           NodeId sender, NodeId receiver, double power,
                           double prob = 1.0) {
  if (sender >= space.size() || receiver >= space.size())
    throw PreconditionError("link " + std::to_string(id) +
                            ": endpoint out of range");
  return {id, sender, receiver, space(sender, receiver), power, prob, true};
}

// Background transmitter in the broadcast model: transmits with `power`
// independently in each round with probability `activity`.
struct Interferer {
  NodeId node = 0;
  double power = 0.0;
  double activity = 0.0;
};

// Single-sender broadcast scenario. `weights` is the receiver-arrival
// distribution over `users` (hidden from the algorithm).
struct BroadcastSpec {
  NodeId sender = 0;
  std::vector<NodeId> users;
  std::vector<double> weights;
  std::vector<Interferer> interferers;
};

struct Instance {
  QuasiMetricSpace space;
  std::vector<QuasiLink> links;
  ScenarioConfig config;
  std::optional<BroadcastSpec> broadcast;
};

// Structural checks: endpoints in range, cached lengths agree with the matrix,
// powers and probabilities in range. Axiom checks live in
// validate_quasi_metric().
inline void validate_instance(const Instance& inst) {
  const std::size_t n = inst.space.size();
  for (const auto& l : inst.links) {
    const std::string tag = "link " + std::to_string(l.id) + ": ";
    if (l.sender >= n || l.receiver >= n)
      throw PreconditionError(tag + "endpoint out of range");
    if (!(l.length > 0.0)) throw PreconditionError(tag + "quasi-length must be > 0");
    if (l.length != inst.space(l.sender, l.receiver))
      throw PreconditionError(tag + "cached length differs from the matrix");
    if (!(l.power > 0.0)) throw PreconditionError(tag + "power must be > 0");
    if (l.active && !(l.prob > 0.0 && l.prob <= 1.0))
      throw PreconditionError(tag + "probability must lie in (0,1]");
  }
  if (inst.broadcast) {
    const auto& b = *inst.broadcast;
    if (b.sender >= n) throw PreconditionError("broadcast sender out of range");
    if (b.users.empty()) throw PreconditionError("broadcast has no users");
    if (b.weights.size() != b.users.size())
      throw PreconditionError("broadcast weights must match users");
    double total = 0.0;
    for (std::size_t k = 0; k < b.users.size(); ++k) {
      if (b.users[k] >= n || b.users[k] == b.sender)
        throw PreconditionError("broadcast user " + std::to_string(k) +
                                " invalid");
      if (!(b.weights[k] >= 0.0))
        throw PreconditionError("broadcast weight must be >= 0");
      total += b.weights[k];
    }
    if (!(total > 0.0)) throw PreconditionError("broadcast weights sum to 0");
    for (const auto& f : b.interferers) {
      if (f.node >= n) throw PreconditionError("interferer out of range");
      if (!(f.power >= 0.0 && f.activity >= 0.0 && f.activity <= 1.0))
        throw PreconditionError("interferer power/activity out of range");
    }
  }
}

namespace detail {

inline double planar_distance(const std::array<double, 2>& a,
                              const std::array<double, 2>& b) {
  // Floor keeps the matrix strictly positive off the diagonal if two samples
  // coincide.
  return std::max(std::hypot(a[0] - b[0], a[1] - b[1]), 1e-9);
}

// (d(u,v) * s(u,v))^alpha with an independent s in [1, sigma] per ordered pair.
inline QuasiMetricSpace decay_space_from_points(
    const std::vector<std::array<double, 2>>& pts, double alpha, double sigma,
    SplitMix64& rng) {
  const std::size_t n = pts.size();
  std::vector<double> raw(n * n, 0.0);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      const double stretch = sigma == 1.0 ? 1.0 : rng.uniform(1.0, sigma);
      raw[u * n + v] = std::pow(planar_distance(pts[u], pts[v]) * stretch, alpha);
    }
  auto space = closure_quasi_metric(n, raw);
  space.coords = pts;
  return space;
}

}  // namespace detail

// Powers decreasing in link length: P = base * (q_max / q)^tau with
// base = c * beta * N * q_max. Satisfies both power conditions for any tau >= 0.
inline void assign_powers(std::vector<QuasiLink>& links, const ScenarioConfig& cfg) {
  double q_max = 0.0;
  for (const auto& l : links) q_max = std::max(q_max, l.length);
  if (links.empty()) return;
  const double base =
      cfg.noise > 0.0 ? cfg.c_power * cfg.beta * cfg.noise * q_max : q_max;
  for (auto& l : links) l.power = base * std::pow(q_max / l.length, cfg.power_tau);
}

// Random link instance: each link gets its own sender and receiver node.
// Senders are uniform in a square (side `area_side`, or sqrt(n/link_density)
// when 0); receivers sit at a uniform angle and length in
// [link_len_min, link_len_max].
inline Instance generate_instance(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (cfg.n_links < 1) throw PreconditionError("n_links must be >= 1");
  const auto n_links = static_cast<std::size_t>(cfg.n_links);
  const double side = cfg.area_side > 0.0
                          ? cfg.area_side
                          : std::sqrt(static_cast<double>(n_links) / cfg.link_density);
  SplitMix64 rng(mix64(seed) ^ 0x6c696e6b73ULL);
  std::vector<std::array<double, 2>> pts(2 * n_links);
  for (std::size_t i = 0; i < n_links; ++i) {
    const double x = rng.uniform(0.0, side), y = rng.uniform(0.0, side);
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double len = rng.uniform(cfg.link_len_min, cfg.link_len_max);
    pts[2 * i] = {x, y};
    pts[2 * i + 1] = {x + len * std::cos(theta), y + len * std::sin(theta)};
  }
  Instance inst;
  inst.config = cfg;
  inst.config.seed = seed;
  inst.space = detail::decay_space_from_points(pts, cfg.alpha, cfg.sigma, rng);
  for (std::size_t i = 0; i < n_links; ++i)
    inst.links.push_back(make_link(inst.space, i, 2 * i, 2 * i + 1, 1.0, 1.0));
  assign_powers(inst.links, cfg);
  return inst;
}

// Symmetric broadcast instance: node 0 is the sender at the origin, then
// n_users users at uniform angle and radius in [user_radius_min,
// user_radius_max], then n_interferers background transmitters in the ring
// [user_radius_max, 2 * user_radius_max]. Arrival weights are random and
// normalized.
inline Instance generate_broadcast_instance(const ScenarioConfig& cfg,
                                            std::uint64_t seed) {
  cfg.validate();
  if (cfg.n_users < 1) throw PreconditionError("n_users must be >= 1");
  if (cfg.n_interferers < 0) throw PreconditionError("n_interferers must be >= 0");
  if (!(cfg.user_radius_min > 0.0 && cfg.user_radius_min <= cfg.user_radius_max))
    throw PreconditionError("need 0 < user_radius_min <= user_radius_max");
  const auto users = static_cast<std::size_t>(cfg.n_users);
  const auto jammers = static_cast<std::size_t>(cfg.n_interferers);
  SplitMix64 rng(mix64(seed) ^ 0x6272646361737431ULL);
  std::vector<std::array<double, 2>> pts;
  pts.push_back({0.0, 0.0});
  auto polar = [&](double lo, double hi) {
    const double rad = rng.uniform(lo, hi);
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    pts.push_back({rad * std::cos(theta), rad * std::sin(theta)});
  };
  for (std::size_t k = 0; k < users; ++k)
    polar(cfg.user_radius_min, cfg.user_radius_max);
  for (std::size_t k = 0; k < jammers; ++k)
    polar(cfg.user_radius_max, 2.0 * cfg.user_radius_max);

  Instance inst;
  inst.config = cfg;
  inst.config.seed = seed;
  inst.config.sigma = 1.0;
  inst.space = detail::decay_space_from_points(pts, cfg.alpha, 1.0, rng);
  BroadcastSpec b;
  b.sender = 0;
  double total = 0.0;
  for (std::size_t k = 0; k < users; ++k) {
    b.users.push_back(1 + k);
    b.weights.push_back(rng.uniform(0.5, 1.5));
    total += b.weights.back();
  }
  for (auto& w : b.weights) w /= total;
  for (std::size_t k = 0; k < jammers; ++k)
    b.interferers.push_back(
        {1 + users + k, cfg.interferer_power, cfg.interferer_activity});
  inst.broadcast = std::move(b);
  return inst;
}

// ---------------------------------------------------------------------------
// Content digest (FNV-1a over the matrix, links and broadcast block).

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t len) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t k = 0; k < len; ++k) {
      h_ ^= c[k];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <class T>
  void value(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    bytes(&v, sizeof v);
  }
  std::uint64_t get() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::string instance_digest(const Instance& inst) {
  Fnv1a h;
  h.value(static_cast<std::uint64_t>(inst.space.size()));
  h.bytes(inst.space.matrix().data(), inst.space.matrix().size() * sizeof(double));
  for (const auto& l : inst.links) {
    h.value(static_cast<std::uint64_t>(l.id));
    h.value(static_cast<std::uint64_t>(l.sender));
    h.value(static_cast<std::uint64_t>(l.receiver));
    h.value(l.power);
    h.value(l.prob);
  }
  if (inst.broadcast) {
    const auto& b = *inst.broadcast;
    h.value(static_cast<std::uint64_t>(b.sender));
    for (std::size_t k = 0; k < b.users.size(); ++k) {
      h.value(static_cast<std::uint64_t>(b.users[k]));
      h.value(b.weights[k]);
    }
    for (const auto& f : b.interferers) {
      h.value(static_cast<std::uint64_t>(f.node));
      h.value(f.power);
      h.value(f.activity);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h.get()));
  return buf;
}

}  // namespace decaysim
