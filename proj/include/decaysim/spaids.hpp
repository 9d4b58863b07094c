#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decaysim/config.hpp"
#include "decaysim/conflict.hpp"
#include "decaysim/error.hpp"
#include "decaysim/instance.hpp"
#include "decaysim/random.hpp"
#include "decaysim/sinrcore.hpp"

namespace decaysim {

// ---------------------------------------------------------------------------
// Palette

struct ColorPalette {
  std::size_t K = 1;
  double base = 0.0;  // C1 / 2n
  double p_max = 1.0;
  std::vector<double> levels;  // levels[mu] for mu = 0..K

  double level(std::size_t mu) const { return levels.at(std::min(mu, K)); }
  // Color a link leaves phase mu with when it did not quit: 2 * level(mu+1),
  // clamped to 1.
  double exit_color(std::size_t mu) const { return std::min(1.0, 2.0 * level(mu + 1)); }
};

inline std::size_t palette_size(const ScenarioConfig& cfg) {
  // The small slack keeps exact integers (e.g. 2.0000000000000004) from
  // rounding up.
  const double raw = 2.0 * cfg.C1 * cfg.beta_prime / (cfg.beta * cfg.C2);
  return static_cast<std::size_t>(std::max(1.0, std::ceil(raw - 1e-9)));
}

inline ColorPalette color_palette(const ScenarioConfig& cfg, std::size_t n) {
  if (n < 1) throw PreconditionError("color_palette: n must be >= 1");
  ColorPalette pal;
  pal.K = palette_size(cfg);
  pal.base = cfg.C1 / (2.0 * static_cast<double>(n));
  pal.p_max = cfg.p_max;
  if (!(cfg.p_max > pal.base))
    throw PreconditionError("color_palette: p_max must exceed C1/(2n) = " +
                            std::to_string(pal.base));
  const double step = (cfg.p_max - pal.base) / static_cast<double>(pal.K);
  for (std::size_t mu = 0; mu <= pal.K; ++mu)
    pal.levels.push_back(pal.base + static_cast<double>(mu) * step);
  pal.levels.back() = cfg.p_max;
  return pal;
}

// Bare "log n" in round counts: base 2, at least 1.
inline std::size_t log_rounds(std::size_t n) {
  std::size_t L = 0;
  while ((std::size_t{1} << L) < n) ++L;
  return std::max<std::size_t>(1, L);
}

// ---------------------------------------------------------------------------
// Results

struct LinkRecord {
  std::size_t link = 0;
  bool transmitted = false;
  double sinr = 0.0;
  bool data_ok = false;
  bool ack_ok = false;
  bool quit = false;
};

struct SlotOutcome {
  std::size_t round = 0;  // global round index
  std::size_t phase = 0;  // mu
  std::vector<LinkRecord> records;  // links taking part in the round
};

struct GateRecord {
  std::size_t round = 0;
  std::size_t link = 0;
  std::size_t near = 0;  // interferers that passed the distance gate
  double waff = 0.0;
  double threshold = 0.0;
  bool passed = false;     // WAFF gate
  bool confirmed = false;  // joint SINR check with the phase set
};

struct AckStats {
  std::size_t data_attempts = 0;
  std::size_t data_successes = 0;
  std::size_t ack_attempts = 0;
  std::size_t ack_successes = 0;
};

struct LinkOutcome {
  std::size_t slot = 0;
  double color = 0.0;
  std::size_t quit_round = 0;
  bool forced = false;
};

struct ScheduleResult {
  std::size_t total_rounds = 0;
  std::size_t epochs = 0;
  std::size_t phases = 0;
  std::vector<std::vector<std::size_t>> schedule;  // slot -> link ids
  std::vector<LinkOutcome> links;
  std::vector<GateRecord> gate_trace;
  std::vector<double> exit_colors;  // logged phase-exit colors, one per phase run
  AckStats acks;
  double power_ratio = 1.0;   // max P / min P
  double length_ratio = 1.0;  // max q / min q
  std::size_t forced = 0;
  bool partial = false;    // budget ran out in strict mode
  bool feasible = false;   // every slot passed the post-hoc SINR check
  std::vector<SlotOutcome> rounds;  // filled only when recording is on

  std::size_t slots() const { return schedule.size(); }
};

struct SpaidsOptions {
  bool record_rounds = false;
  bool record_gates = true;
};

// ---------------------------------------------------------------------------
// Engine

class SpaidsEngine {
 public:
  enum class Stage { kDetect, kProbe, kIdle, kDone };

  SpaidsEngine(const Instance& inst, std::uint64_t seed, SpaidsOptions opts = {})
      : inst_(inst), cfg_(inst.config), seed_(seed), opts_(opts) {
    cfg_.validate_scheduling();
    validate_instance(inst_);
    if (inst_.links.empty()) throw PreconditionError("spaids: no links");
    n_ = inst_.links.size();
    for (std::size_t k = 0; k < n_; ++k)
      if (inst_.links[k].id != k)
        throw PreconditionError("spaids: link ids must be 0..n-1 in order");
    palette_ = color_palette(cfg_, n_);
    L_ = log_rounds(n_);
    budget_ = static_cast<std::size_t>(std::ceil(cfg_.c_T * static_cast<double>(L_)));
    dt_window_ = ceil_rounds(cfg_.c0);
    dt_need_ = ceil_rounds(cfg_.c1);
    pf_window_ = ceil_rounds(cfg_.c2);
    pf_need_ = ceil_rounds(cfg_.c3);
    state_.assign(n_, {});
    prepare_ack_powers();
    start_phase(0);
  }

  const ColorPalette& palette() const { return palette_; }
  std::size_t log_n() const { return L_; }
  std::size_t phase_budget() const { return budget_; }
  std::size_t round() const { return round_; }
  double ack_power_of(std::size_t link) const { return ack_power_[link]; }
  double color(std::size_t link) const { return state_.at(link).p; }
  void set_color(std::size_t link, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("set_color: p outside [0,1]");
    state_.at(link).p = p;
  }

  // Full scheduling run.
  ScheduleResult run();

  // One data+ack round with every link in the detect/probe stages taking
  // part. Advances the round counter.
  SlotOutcome slot_step();

  // Standalone acknowledgement-counting procedures for one link while every
  // other link transmits with its current color. Windows repeat until one
  // succeeds or the phase budget is spent.
  bool dt_procedure(std::size_t link) { return procedure(link, 1.0, dt_window_, dt_need_); }
  bool pf_procedure(std::size_t link) {
    return procedure(link, cfg_.c_eps, pf_window_, pf_need_);
  }

  // Per-round data success frequency of `link` when every link transmits
  // with probability probs[link] (used by the receive-probability check).
  double receive_frequency(std::span<const double> probs, std::size_t link,
                           std::size_t rounds);

 private:
  struct LinkState {
    Stage stage = Stage::kIdle;
    double p = 0.0;
    std::size_t window_left = 0;
    std::size_t acks = 0;
    bool scheduled = false;
  };

  std::size_t ceil_rounds(double c) const {
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(c * static_cast<double>(L_) - 1e-9)));
  }

  void prepare_ack_powers() {
    const auto& q = inst_.space;
    ack_power_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto& li = inst_.links[i];
      // Reference interferer: the sender closest to r_i.
      std::size_t ref = n_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_; ++j) {
        if (j == i) continue;
        const double d = q(inst_.links[j].sender, li.receiver);
        if (d < best) { best = d; ref = j; }
      }
      ack_power_[i] = ref == n_ ? ack_power_isolated(q, li)
                                : ack_power(q, li, inst_.links[ref]);
    }
  }

  double draw(std::size_t link, Draw purpose = Draw::kTransmit) const {
    return keyed_uniform(seed_, link, round_, purpose);
  }

  // Simulates one round for the given transmit decisions. Returns per-link
  // data/ack outcomes for the transmitters.
  struct RoundResult {
    std::vector<std::size_t> tx;
    std::vector<double> sinr;
    std::vector<char> data_ok, ack_ok;
  };
  RoundResult simulate(const std::vector<std::size_t>& tx);

  bool procedure(std::size_t link, double scale, std::size_t window, std::size_t need);

  void start_phase(std::size_t mu);
  void start_window(LinkState& s, Stage stage) {
    s.stage = stage;
    s.window_left = stage == Stage::kDetect ? dt_window_ : pf_window_;
    s.acks = 0;
  }
  void on_failure(LinkState& s, std::size_t mu) {
    // Doubling walks p across [level(mu), level(mu+1)]; leaving the range
    // idles the link until the next phase.
    const double next = 2.0 * s.p;
    if (next > palette_.level(mu + 1) && s.p < cfg_.p_max) {
      s.stage = Stage::kIdle;
      return;
    }
    s.p = std::min(next, cfg_.p_max);
    start_window(s, Stage::kDetect);
  }
  bool try_quit(std::size_t i, std::vector<std::size_t>& phase_set, ScheduleResult& res);

  const Instance& inst_;
  ScenarioConfig cfg_;
  std::uint64_t seed_;
  SpaidsOptions opts_;
  std::size_t n_ = 0;
  ColorPalette palette_;
  std::size_t L_ = 1, budget_ = 1;
  std::size_t dt_window_ = 1, dt_need_ = 1, pf_window_ = 1, pf_need_ = 1;
  std::vector<LinkState> state_;
  std::vector<double> ack_power_;
  std::size_t round_ = 0;
  std::size_t phase_ = 0;
};

inline SpaidsEngine::RoundResult SpaidsEngine::simulate(
    const std::vector<std::size_t>& tx) {
  const auto& q = inst_.space;
  RoundResult rr;
  rr.tx = tx;
  rr.sinr.assign(tx.size(), 0.0);
  rr.data_ok.assign(tx.size(), 0);
  rr.ack_ok.assign(tx.size(), 0);
  // Data sub-slot.
  for (std::size_t a = 0; a < tx.size(); ++a) {
    const auto& li = inst_.links[tx[a]];
    double interference = 0.0;
    for (std::size_t b = 0; b < tx.size(); ++b) {
      if (b == a) continue;
      const auto& lj = inst_.links[tx[b]];
      interference += lj.power / q(lj.sender, li.receiver);
    }
    const double denom = interference + cfg_.noise;
    rr.sinr[a] = denom == 0.0 ? kInfiniteSinr : (li.power / li.length) / denom;
    rr.data_ok[a] = rr.sinr[a] >= cfg_.beta;
  }
  // Ack sub-slot: every receiver that decoded answers with its ack power.
  for (std::size_t a = 0; a < tx.size(); ++a) {
    if (!rr.data_ok[a]) continue;
    const auto& li = inst_.links[tx[a]];
    double interference = 0.0;
    for (std::size_t b = 0; b < tx.size(); ++b) {
      if (b == a || !rr.data_ok[b]) continue;
      const auto& lj = inst_.links[tx[b]];
      interference += ack_power_[tx[b]] / q(lj.receiver, li.sender);
    }
    const double denom = interference + cfg_.noise;
    const double s = denom == 0.0
                         ? kInfiniteSinr
                         : (ack_power_[tx[a]] / q(li.receiver, li.sender)) / denom;
    rr.ack_ok[a] = s >= cfg_.beta;
  }
  return rr;
}

inline SlotOutcome SpaidsEngine::slot_step() {
  std::vector<std::size_t> tx;
  SlotOutcome out;
  out.round = round_;
  out.phase = phase_;
  for (std::size_t i = 0; i < n_; ++i) {
    const auto& s = state_[i];
    if (s.stage != Stage::kDetect && s.stage != Stage::kProbe) continue;
    const double prob = s.stage == Stage::kDetect ? s.p : s.p * cfg_.c_eps;
    LinkRecord rec;
    rec.link = i;
    rec.transmitted = draw(i) < prob;
    if (rec.transmitted) tx.push_back(i);
    out.records.push_back(rec);
  }
  auto rr = simulate(tx);
  for (std::size_t a = 0, r = 0; a < rr.tx.size(); ++a) {
    while (out.records[r].link != rr.tx[a]) ++r;
    out.records[r].sinr = rr.sinr[a];
    out.records[r].data_ok = rr.data_ok[a];
    out.records[r].ack_ok = rr.ack_ok[a];
  }
  ++round_;
  return out;
}

inline bool SpaidsEngine::procedure(std::size_t link, double scale,
                                    std::size_t window, std::size_t need) {
  if (link >= n_) throw PreconditionError("procedure: link out of range");
  std::size_t left = budget_;
  while (left > 0) {
    std::size_t acks = 0;
    const std::size_t w = std::min(window, left);
    for (std::size_t t = 0; t < w; ++t) {
      std::vector<std::size_t> tx;
      for (std::size_t i = 0; i < n_; ++i) {
        const double prob = i == link ? state_[i].p * scale : state_[i].p;
        if (draw(i) < prob) tx.push_back(i);
      }
      auto rr = simulate(tx);
      for (std::size_t a = 0; a < rr.tx.size(); ++a)
        if (rr.tx[a] == link && rr.ack_ok[a]) ++acks;
      ++round_;
      --left;
      if (acks >= need) return true;
    }
  }
  return false;
}

inline double SpaidsEngine::receive_frequency(std::span<const double> probs,
                                              std::size_t link, std::size_t rounds) {
  if (probs.size() != n_) throw PreconditionError("receive_frequency: one p per link");
  std::size_t ok = 0;
  for (std::size_t t = 0; t < rounds; ++t) {
    std::vector<std::size_t> tx;
    for (std::size_t i = 0; i < n_; ++i)
      if (draw(i) < probs[i]) tx.push_back(i);
    auto rr = simulate(tx);
    for (std::size_t a = 0; a < rr.tx.size(); ++a)
      if (rr.tx[a] == link && rr.data_ok[a]) ++ok;
    ++round_;
  }
  return static_cast<double>(ok) / static_cast<double>(rounds);
}

inline void SpaidsEngine::start_phase(std::size_t mu) {
  phase_ = mu;
  for (auto& s : state_) {
    if (s.scheduled) {
      s.stage = Stage::kDone;
      continue;
    }
    s.p = palette_.level(mu);
    start_window(s, Stage::kDetect);
  }
}

// Distance gate, WAFF gate over the links that passed it, then a joint SINR
// check against the links already quit in this phase.
inline bool SpaidsEngine::try_quit(std::size_t i, std::vector<std::size_t>& phase_set,
                                   ScheduleResult& res) {
  const auto& q = inst_.space;
  QuasiLink li = inst_.links[i];
  li.prob = state_[i].p;
  std::vector<QuasiLink> near;
  for (std::size_t j : phase_set) {
    QuasiLink lj = inst_.links[j];
    lj.prob = res.links[j].color;
    const double R = std::max(li.power, lj.power) / std::min(li.power, lj.power);
    const double d = cross_distance(q, lj, li);
    const double unit = li.length;
    const double inner = R * unit * cfg_.gamma1;
    const double k = d <= inner ? 1.0 : std::ceil((d - inner) / unit) + 1.0;
    const double limit =
        lj.prob * std::pow(R, 1.0 - cfg_.gate_eps) * unit * cfg_.gamma1 + (k - 1.0) * unit;
    if (d < limit) near.push_back(lj);
  }
  GateRecord g;
  g.round = round_ - 1;
  g.link = i;
  g.near = near.size();
  g.waff = cfg_.capped_affectance ? waff_capped(q, near, li, cfg_.capped_c)
                                  : waff(q, near, li);
  g.threshold = std::min(cfg_.gate_threshold(), cfg_.density_gate_threshold());
  g.passed = g.waff <= g.threshold;
  if (g.passed) {
    std::vector<QuasiLink> joint;
    for (std::size_t j : phase_set) joint.push_back(inst_.links[j]);
    joint.push_back(inst_.links[i]);
    g.confirmed = sinr_feasible(q, joint, cfg_);
  }
  if (opts_.record_gates) res.gate_trace.push_back(g);
  return g.passed && g.confirmed;
}

inline ScheduleResult SpaidsEngine::run() {
  const auto& q = inst_.space;
  ScheduleResult res;
  res.links.resize(n_);
  double p_lo = std::numeric_limits<double>::infinity(), p_hi = 0.0;
  double q_lo = p_lo, q_hi = 0.0;
  for (const auto& l : inst_.links) {
    p_lo = std::min(p_lo, l.power);
    p_hi = std::max(p_hi, l.power);
    q_lo = std::min(q_lo, l.length);
    q_hi = std::max(q_hi, l.length);
  }
  res.power_ratio = p_hi / p_lo;
  res.length_ratio = q_hi / q_lo;

  std::size_t remaining = n_;
  for (int epoch = 0; epoch < cfg_.max_epochs && remaining > 0; ++epoch) {
    res.epochs = static_cast<std::size_t>(epoch) + 1;
    for (std::size_t mu = 0; mu < palette_.K && remaining > 0; ++mu) {
      start_phase(mu);
      ++res.phases;
      std::vector<std::size_t> phase_set;
      for (std::size_t t = 0; t < budget_; ++t) {
        const bool busy = std::any_of(state_.begin(), state_.end(), [](const LinkState& s) {
          return s.stage == Stage::kDetect || s.stage == Stage::kProbe;
        });
        if (!busy) break;
        auto out = slot_step();
        ++res.total_rounds;
        for (auto& rec : out.records) {
          auto& s = state_[rec.link];
          if (rec.transmitted) ++res.acks.data_attempts;
          if (rec.data_ok) {
            ++res.acks.data_successes;
            ++res.acks.ack_attempts;
          }
          if (rec.ack_ok) {
            ++res.acks.ack_successes;
            ++s.acks;
          }
          --s.window_left;
          const std::size_t need = s.stage == Stage::kDetect ? dt_need_ : pf_need_;
          if (s.acks >= need) {
            if (s.stage == Stage::kDetect) {
              start_window(s, Stage::kProbe);
            } else if (try_quit(rec.link, phase_set, res)) {
              s.scheduled = true;
              s.stage = Stage::kDone;
              res.links[rec.link] = {res.schedule.size(), s.p, round_ - 1, false};
              phase_set.push_back(rec.link);
              rec.quit = true;
              --remaining;
            } else {
              on_failure(s, mu);
            }
          } else if (s.window_left == 0) {
            on_failure(s, mu);
          }
        }
        if (opts_.record_rounds) res.rounds.push_back(std::move(out));
      }
      if (!phase_set.empty()) res.schedule.push_back(std::move(phase_set));
      if (remaining > 0) res.exit_colors.push_back(palette_.exit_color(mu));
    }
  }

  // Links still waiting when the epoch budget runs out are placed first-fit
  // into trailing slots after the algorithm's own slots.
  const std::size_t first_trailing = res.schedule.size();
  for (std::size_t i = 0; i < n_; ++i) {
    if (state_[i].scheduled) continue;
    std::size_t slot = res.schedule.size();
    for (std::size_t k = first_trailing; k < res.schedule.size(); ++k) {
      std::vector<QuasiLink> joint;
      for (std::size_t j : res.schedule[k]) joint.push_back(inst_.links[j]);
      joint.push_back(inst_.links[i]);
      if (sinr_feasible(q, joint, cfg_)) {
        slot = k;
        break;
      }
    }
    if (slot == res.schedule.size()) res.schedule.emplace_back();
    res.schedule[slot].push_back(i);
    res.links[i] = {slot, state_[i].p, round_, true};
    state_[i].scheduled = true;
    ++res.forced;
  }
  res.partial = res.forced > 0 && cfg_.strict;

  res.feasible = true;
  for (const auto& slot : res.schedule) {
    std::vector<QuasiLink> set;
    for (std::size_t j : slot) set.push_back(inst_.links[j]);
    if (!sinr_feasible(q, set, cfg_)) res.feasible = false;
  }
  return res;
}

inline ScheduleResult spaids_run(const Instance& inst, std::uint64_t seed,
                                 SpaidsOptions opts = {}) {
  SpaidsEngine engine(inst, seed, opts);
  return engine.run();
}

// Per-round frequency with which the receiver `center` hears some transmitter
// from `candidates` (link ids) and that transmitter gets the acknowledgement
// back. Every link not sending from `center` transmits independently with
// probs[j]. In the ack sub-slot `center` answers with the mirrored power
// P_u q(c,s_u)/q(s_u,c); every other link whose own receiver decoded it
// answers the same way and interferes.
struct ReceptionCount {
  std::size_t rounds = 0;
  std::size_t heard = 0;  // data decoded at the center
  std::size_t acked = 0;  // ...and the ack decoded at the sender
};

inline ReceptionCount reception_frequency(const Instance& inst, NodeId center,
                                          std::span<const std::size_t> candidates,
                                          std::span<const double> probs, std::size_t rounds,
                                          std::uint64_t seed) {
  const auto& q = inst.space;
  const auto& links = inst.links;
  const double noise = inst.config.noise, beta = inst.config.beta;
  if (probs.size() != links.size()) throw PreconditionError("reception_frequency: one p per link");
  if (center >= q.size()) throw PreconditionError("reception_frequency: center out of range");
  std::vector<char> candidate(links.size(), 0);
  for (std::size_t j : candidates) {
    if (j >= links.size()) throw PreconditionError("reception_frequency: candidate out of range");
    candidate[j] = 1;
  }
  ReceptionCount out;
  out.rounds = rounds;
  std::vector<std::size_t> tx;
  for (std::size_t t = 0; t < rounds; ++t) {
    tx.clear();
    for (std::size_t j = 0; j < links.size(); ++j)
      if (links[j].sender != center && keyed_uniform(seed, j, t, Draw::kTransmit) < probs[j])
        tx.push_back(j);
    double at_center = 0.0;
    for (std::size_t j : tx) at_center += links[j].power / q(links[j].sender, center);
    std::optional<std::size_t> heard;
    for (std::size_t u : tx) {
      if (!candidate[u]) continue;
      const double sig = links[u].power / q(links[u].sender, center);
      if (sig / (at_center - sig + noise) >= beta) heard = u;
    }
    if (!heard) continue;
    ++out.heard;
    // Ack sub-slot.
    const auto& lu = links[*heard];
    std::vector<std::pair<NodeId, double>> acks;  // (node, power)
    for (std::size_t j : tx) {
      if (j == *heard) continue;
      const auto& lj = links[j];
      double interference = 0.0;
      for (std::size_t x : tx)
        if (x != j) interference += links[x].power / q(links[x].sender, lj.receiver);
      if ((lj.power / lj.length) / (interference + noise) >= beta)
        acks.push_back({lj.receiver, lj.power * q(lj.receiver, lj.sender) / lj.length});
    }
    const double ack_power = lu.power * q(center, lu.sender) / q(lu.sender, center);
    double interference = 0.0;
    for (const auto& [node, pw] : acks) interference += pw / q(node, lu.sender);
    if ((ack_power / q(center, lu.sender)) / (interference + noise) >= beta) ++out.acked;
  }
  return out;
}

// Power and length spreads of an instance's links.
inline double power_spread(std::span<const QuasiLink> links) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& l : links) {
    lo = std::min(lo, l.power);
    hi = std::max(hi, l.power);
  }
  return links.empty() ? 1.0 : hi / lo;
}

}  // namespace decaysim
