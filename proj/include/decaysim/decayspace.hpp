#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaysim/error.hpp"

namespace decaysim {

using NodeId = std::size_t;

// A finite decay space: n nodes and a dense, row-major n x n matrix of
// directed quasi-distances. Construction does not check the axioms; use
// closure_quasi_metric() to build a valid space or validate_quasi_metric()
// to audit one.
class QuasiMetricSpace {
 public:
  QuasiMetricSpace() = default;

  QuasiMetricSpace(std::size_t n, std::vector<double> q)
      : n_(n), q_(std::move(q)) {
    if (q_.size() != n_ * n_)
      throw PreconditionError("quasi-distance matrix must be n x n");
  }

  static QuasiMetricSpace from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& row : rows) {
      if (row.size() != n)
        throw PreconditionError("quasi-distance matrix must be square");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    return QuasiMetricSpace(n, std::move(flat));
  }

  std::size_t size() const noexcept { return n_; }
  double operator()(NodeId u, NodeId v) const noexcept { return q_[u * n_ + v]; }
  std::span<const double> row(NodeId u) const noexcept {
    return {q_.data() + u * n_, n_};
  }
  const std::vector<double>& matrix() const noexcept { return q_; }

  // Symmetrized distance used for packing arguments.
  double sym(NodeId u, NodeId v) const noexcept {
    return std::min((*this)(u, v), (*this)(v, u));
  }

  bool is_symmetric() const noexcept {
    for (std::size_t u = 0; u < n_; ++u)
      for (std::size_t v = u + 1; v < n_; ++v)
        if ((*this)(u, v) != (*this)(v, u)) return false;
    return true;
  }

  // Optional planar positions the space was synthesized from.
  std::vector<std::array<double, 2>> coords;
  // Optional node labels; empty means "use the index".
  std::vector<std::string> labels;

  std::string label(NodeId u) const {
    return u < labels.size() ? labels[u] : std::to_string(u);
  }

  friend bool operator==(const QuasiMetricSpace& a, const QuasiMetricSpace& b) {
    return a.n_ == b.n_ && a.q_ == b.q_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> q_;
};

namespace detail {

inline std::string pair_str(std::size_t u, std::size_t v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

}  // namespace detail

// Repairs an arbitrary asymmetric matrix into a quasi-metric by all-pairs
// shortest-path closure. Floyd-Warshall passes repeat until a pass changes
// nothing, so the directed triangle inequality holds exactly in floating
// point and the operation is idempotent.
inline QuasiMetricSpace closure_quasi_metric(std::size_t n,
                                             std::span<const double> raw) {
  if (raw.size() != n * n)
    throw PreconditionError("raw matrix must be n x n");
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = 0; v < n; ++v) {
      const double x = raw[u * n + v];
      if (!std::isfinite(x))
        throw PreconditionError("non-finite entry at " + detail::pair_str(u, v));
      if (x < 0.0)
        throw PreconditionError("negative entry at " + detail::pair_str(u, v));
      if (u == v && x != 0.0)
        throw PreconditionError("nonzero diagonal entry at " +
                                detail::pair_str(u, v));
      if (u != v && x == 0.0)
        throw PreconditionError("zero off-diagonal entry at " +
                                detail::pair_str(u, v));
    }
  }
  std::vector<double> d(raw.begin(), raw.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      const double* dk = d.data() + k * n;
      for (std::size_t u = 0; u < n; ++u) {
        const double duk = d[u * n + k];
        double* du = d.data() + u * n;
        for (std::size_t v = 0; v < n; ++v) {
          const double via = duk + dk[v];
          if (via < du[v]) {
            du[v] = via;
            changed = true;
          }
        }
      }
    }
  }
  return QuasiMetricSpace(n, std::move(d));
}

inline QuasiMetricSpace closure_quasi_metric(
    const std::vector<std::vector<double>>& rows) {
  auto raw = QuasiMetricSpace::from_rows(rows);
  return closure_quasi_metric(raw.size(), raw.matrix());
}

inline QuasiMetricSpace closure_quasi_metric(const QuasiMetricSpace& space) {
  auto out = closure_quasi_metric(space.size(), space.matrix());
  out.coords = space.coords;
  out.labels = space.labels;
  return out;
}

// ---------------------------------------------------------------------------
// Axiom audit

enum class AxiomViolation {
  kNonFinite,
  kNegative,
  kNonzeroDiagonal,
  kZeroOffDiagonal,  // q(u,v) = 0 for u != v, reverse direction positive
  kIdentity,         // q(u,v) = q(v,u) = 0 for u != v
  kTriangle,         // q(u,v) > q(u,w) + q(w,v)
};

inline const char* to_string(AxiomViolation k) {
  switch (k) {
    case AxiomViolation::kNonFinite: return "non_finite";
    case AxiomViolation::kNegative: return "negative";
    case AxiomViolation::kNonzeroDiagonal: return "nonzero_diagonal";
    case AxiomViolation::kZeroOffDiagonal: return "zero_off_diagonal";
    case AxiomViolation::kIdentity: return "identity";
    case AxiomViolation::kTriangle: return "triangle";
  }
  return "unknown";
}

struct Violation {
  AxiomViolation kind;
  // Witness. For triangle violations (u, w, v) is the offending path u->w->v.
  NodeId u = 0, w = 0, v = 0;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool truncated = false;  // hit max_violations; more exist
  bool ok() const noexcept { return violations.empty(); }
};

inline ValidationReport validate_quasi_metric(const QuasiMetricSpace& space,
                                              std::size_t max_violations = 10000) {
  ValidationReport rep;
  const std::size_t n = space.size();
  auto add = [&](AxiomViolation k, NodeId u, NodeId w, NodeId v) {
    if (rep.violations.size() >= max_violations) {
      rep.truncated = true;
      return false;
    }
    rep.violations.push_back({k, u, w, v});
    return true;
  };
  std::vector<char> finite(n * n, 1);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      const double x = space(u, v);
      if (!std::isfinite(x)) {
        finite[u * n + v] = 0;
        if (!add(AxiomViolation::kNonFinite, u, u, v)) return rep;
        continue;
      }
      if (x < 0.0 && !add(AxiomViolation::kNegative, u, u, v)) return rep;
      if (u == v) {
        if (x != 0.0 && !add(AxiomViolation::kNonzeroDiagonal, u, u, u))
          return rep;
      } else if (x == 0.0) {
        const double back = space(v, u);
        if (back == 0.0) {
          if (u < v && !add(AxiomViolation::kIdentity, u, u, v)) return rep;
        } else if (!add(AxiomViolation::kZeroOffDiagonal, u, u, v)) {
          return rep;
        }
      }
    }
  }
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId w = 0; w < n; ++w) {
      if (w == u || !finite[u * n + w]) continue;
      const double uw = space(u, w);
      for (NodeId v = 0; v < n; ++v) {
        if (v == u || v == w || !finite[w * n + v] || !finite[u * n + v])
          continue;
        if (space(u, v) > uw + space(w, v) &&
            !add(AxiomViolation::kTriangle, u, w, v))
          return rep;
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Balls and independence

struct BallQuery {
  NodeId center = 0;
  double radius = 0.0;
};

// Directed ball {z : q(center, z) <= radius}, ascending node id.
inline std::vector<NodeId> ball(const QuasiMetricSpace& space, BallQuery query) {
  if (query.radius < 0.0) throw PreconditionError("ball radius must be >= 0");
  if (query.center >= space.size())
    throw PreconditionError("ball center out of range");
  std::vector<NodeId> out;
  const auto row = space.row(query.center);
  for (NodeId z = 0; z < space.size(); ++z)
    if (row[z] <= query.radius || z == query.center) out.push_back(z);
  return out;
}

namespace detail {

// a and b cannot both belong to a set independent with respect to v.
inline bool independence_conflict(const QuasiMetricSpace& q, NodeId v, NodeId a,
                                  NodeId b) {
  return q(a, b) <= q(v, a) || q(b, a) <= q(v, b);
}

}  // namespace detail

// I is independent with respect to v iff B(w, q(v,w)) meets I only in w for
// every w in I.
inline bool independent_wrt(const QuasiMetricSpace& space, NodeId v,
                            std::span<const NodeId> set) {
  for (NodeId w : set) {
    if (w == v) throw PreconditionError("reference node belongs to the set");
    if (w >= space.size()) throw PreconditionError("node id out of range");
  }
  for (std::size_t a = 0; a < set.size(); ++a) {
    const double radius = space(v, set[a]);
    for (std::size_t b = 0; b < set.size(); ++b) {
      if (a == b || set[a] == set[b]) continue;
      if (space(set[a], set[b]) <= radius) return false;
    }
  }
  return true;
}

inline constexpr std::size_t kIndependenceExhaustiveCap = 16;

// Size of the largest subset of V \ {v} independent with respect to v, by
// exhaustive search. Independence is hereditary, so this is a maximum
// independent set of the pairwise conflict graph.
inline int independence_dimension(const QuasiMetricSpace& space, NodeId v,
                                  std::size_t cap = kIndependenceExhaustiveCap) {
  const std::size_t n = space.size();
  if (n > cap)
    throw CapacityError("independence_dimension: n = " + std::to_string(n) +
                        " exceeds exhaustive cap " + std::to_string(cap) +
                        "; use independence_dimension_greedy()");
  if (v >= n) throw PreconditionError("node id out of range");
  std::vector<NodeId> cand;
  for (NodeId z = 0; z < n; ++z)
    if (z != v) cand.push_back(z);
  const std::size_t m = cand.size();
  std::vector<std::uint32_t> adj(m, 0);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a != b && detail::independence_conflict(space, v, cand[a], cand[b]))
        adj[a] |= (1u << b);
  int best = 0;
  const std::uint32_t limit = 1u << m;
  for (std::uint32_t mask = 1; mask < limit; ++mask) {
    const int size = std::popcount(mask);
    if (size <= best) continue;
    bool ok = true;
    for (std::uint32_t rest = mask; rest && ok; rest &= rest - 1) {
      const int a = std::countr_zero(rest);
      if (adj[a] & mask) ok = false;
    }
    if (ok) best = size;
  }
  return best;
}

// Lower bound for large n: greedy in ascending q(v, .) order.
inline int independence_dimension_greedy(const QuasiMetricSpace& space, NodeId v) {
  std::vector<NodeId> order;
  for (NodeId z = 0; z < space.size(); ++z)
    if (z != v) order.push_back(z);
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return space(v, a) < space(v, b); });
  std::vector<NodeId> chosen;
  for (NodeId z : order) {
    bool ok = true;
    for (NodeId w : chosen)
      if (detail::independence_conflict(space, v, z, w)) {
        ok = false;
        break;
      }
    if (ok) chosen.push_back(z);
  }
  return static_cast<int>(chosen.size());
}

// ---------------------------------------------------------------------------
// Doubling diagnostic

namespace detail {

// Greedy packing of `members` (visited in ascending distance from the center)
// under symmetrized pairwise distance >= sep.
inline std::size_t greedy_packing(const QuasiMetricSpace& space,
                                  std::span<const NodeId> members, double sep) {
  std::vector<NodeId> chosen;
  for (NodeId z : members) {
    bool ok = true;
    for (NodeId w : chosen)
      if (space.sym(z, w) < sep) {
        ok = false;
        break;
      }
    if (ok) chosen.push_back(z);
  }
  return chosen.size();
}

}  // namespace detail

// Empirical doubling exponent. For a ball B(c, r) let P(x) be the size of a
// greedy x-separated packing of the ball. The estimate is the largest
// log(P(eps r) / P(r)) / log(1/eps) over the sampled balls. Normalizing by
// P(r) divides out the absolute constant of the growth bound. Packing uses the
// symmetrized distance min(q(u,v), q(v,u)); ball membership is directed.
//
// `max_centers` and `max_radii` bound the sample (0 = exhaustive).
inline double doubling_estimate(const QuasiMetricSpace& space, double eps,
                                std::size_t max_centers = 0,
                                std::size_t max_radii = 0) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw PreconditionError("doubling_estimate: eps must lie in (0,1]");
  const std::size_t n = space.size();
  if (n <= 1 || eps == 1.0) return 0.0;
  const double log_inv = std::log(1.0 / eps);
  const std::size_t centers = (max_centers == 0 || max_centers >= n) ? n : max_centers;
  double best = 0.0;
  for (std::size_t ci = 0; ci < centers; ++ci) {
    const NodeId c = centers == n ? ci : (ci * n) / centers;
    std::vector<NodeId> order(n);
    for (NodeId z = 0; z < n; ++z) order[z] = z;
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      return space(c, a) < space(c, b);
    });
    std::vector<double> radii;
    for (NodeId z : order) {
      const double r = space(c, z);
      if (r > 0.0 && (radii.empty() || radii.back() != r)) radii.push_back(r);
    }
    std::vector<double> sample = radii;
    if (max_radii != 0 && radii.size() > max_radii) {
      sample.clear();
      for (std::size_t k = 0; k < max_radii; ++k)
        sample.push_back(radii[((k + 1) * radii.size()) / max_radii - 1]);
    }
    for (double r : sample) {
      std::size_t count = 0;
      while (count < n && space(c, order[count]) <= r) ++count;
      std::span<const NodeId> members(order.data(), count);
      const auto fine = detail::greedy_packing(space, members, eps * r);
      const auto coarse = detail::greedy_packing(space, members, r);
      const double est =
          std::log(static_cast<double>(fine) / static_cast<double>(coarse)) /
          log_inv;
      best = std::max(best, est);
    }
  }
  return best;
}

}  // namespace decaysim
