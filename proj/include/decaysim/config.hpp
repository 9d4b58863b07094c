#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "json.hpp"

#include "decaysim/error.hpp"

namespace decaysim {

// Which threshold the WAFF gate compares against.
//   kAlgorithm:   C1 / (beta * C2)   (the scheduling loop's gate)
//   kProposition: 1 / (beta * C2)    (the feasibility characterization)
enum class GateForm { kAlgorithm, kProposition };

// How the broadcast engine charges the battery.
enum class ChargeRule { kPerDelivery, kPerAttempt, kPerRound };

// X-macro table of every numeric knob: (type, name, default).
// Greek symbols are spelled out; m and xi share the `xi` field.
#define DECAYSIM_CONFIG_FIELDS(X)                                          \
  /* SINR model */                                                         \
  X(double, alpha, 3.0)                                                    \
  X(double, beta, 1.5)                                                     \
  X(double, beta_prime, 1.5)                                               \
  X(double, noise, 1.0)                                                    \
  X(double, c_power, 4.0)                                                  \
  X(double, C1, 0.5)                                                       \
  X(double, C2, 0.25)                                                      \
  X(double, C_D, 0.5)                                                      \
  X(double, C_DI, 0.5)                                                     \
  X(double, gamma1, 0.5)                                                   \
  X(double, delta1, 0.5)                                                   \
  X(double, xi, 2.0)                                                       \
  /* instance synthesis */                                                 \
  X(int, n_links, 16)                                                      \
  X(double, sigma, 1.25)                                                   \
  X(double, area_side, 0.0)                                                \
  X(double, link_density, 4.0)                                             \
  X(double, link_len_min, 0.05)                                            \
  X(double, link_len_max, 0.2)                                             \
  X(double, power_tau, 0.5)                                                \
  X(bool, strict, true)                                                    \
  /* scheduling engine */                                                  \
  X(double, c0, 3.0)                                                       \
  X(double, c1, 0.5)                                                       \
  X(double, c2, 3.0)                                                       \
  X(double, c3, 0.5)                                                       \
  X(double, c_eps, 0.5)                                                    \
  X(double, p_max, 1.0)                                                    \
  X(double, c_T, 8.0)                                                      \
  X(int, max_epochs, 32)                                                   \
  X(double, gate_eps, 0.1)                                                 \
  X(bool, capped_affectance, false)                                        \
  X(double, capped_c, 1.0)                                                 \
  /* conflict-graph evaluators */                                          \
  X(double, kappa, 1.0)                                                    \
  X(double, zeta, 2.0)                                                     \
  X(double, h, 2.0)                                                        \
  X(double, s, 0.25)                                                       \
  X(double, dd_mu, 2.0)                                                    \
  X(double, dd_delta, 0.25)                                                \
  X(double, dd_lambda, 1.0)                                                \
  /* online broadcast */                                                   \
  X(double, epsilon, 0.1)                                                  \
  X(double, lambda, 2.0)                                                   \
  X(double, C_B, 100.0)                                                    \
  X(double, r, 20.0)                                                       \
  X(double, s_cap, 1.5)                                                    \
  X(double, oams_gamma, 0.0)                                               \
  X(double, comp_C, 0.25)                                                  \
  X(double, comp_K, 2.0)                                                   \
  X(int, oams_max_rounds, 10000)                                           \
  X(int, n_users, 8)                                                       \
  X(int, n_interferers, 2)                                                 \
  X(double, interferer_power, 0.5)                                         \
  X(double, interferer_activity, 0.3)                                      \
  X(double, user_radius_min, 0.1)                                          \
  X(double, user_radius_max, 1.0)

struct ScenarioConfig {
#define DECAYSIM_DECLARE(type, name, def) type name = def;
  DECAYSIM_CONFIG_FIELDS(DECAYSIM_DECLARE)
#undef DECAYSIM_DECLARE

  GateForm gate_form = GateForm::kAlgorithm;
  ChargeRule charge_rule = ChargeRule::kPerDelivery;
  std::uint64_t seed = 1;

  // WAFF gate threshold per gate_form.
  double gate_threshold() const {
    return gate_form == GateForm::kAlgorithm ? C1 / (beta * C2)
                                             : 1.0 / (beta * C2);
  }
  // Second gate of the scheduling loop.
  double density_gate_threshold() const { return C_D / (beta * C2); }

  // Broadcast affectance gate; unset (<= 0) means 1 / beta.
  double broadcast_gamma() const {
    return oams_gamma > 0.0 ? oams_gamma : 1.0 / beta;
  }

  // Throws PreconditionError naming the first violated invariant.
  void validate() const {
    auto fail = [](const std::string& what) {
      throw PreconditionError("invalid config: " + what);
    };
    if (strict && !(alpha > 2.0 && alpha < 6.0))
      fail("alpha must lie in (2,6)");
    if (!(alpha > 0.0)) fail("alpha must be positive");
    if (!(beta > 0.0)) fail("beta must be positive");
    if (!(beta_prime > 0.0)) fail("beta_prime must be positive");
    if (!(noise >= 0.0)) fail("noise must be nonnegative");
    if (!(c_power > 1.0)) fail("c_power must exceed 1");
    if (!(C2 > 0.0 && C2 <= C1 && C1 <= 1.0)) fail("need 0 < C2 <= C1 <= 1");
    if (!(lambda > 1.0)) fail("lambda must exceed 1");
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must lie in (0,1)");
    if (!(C_B > 0.0)) fail("C_B must be positive");
    if (!(gamma1 > 0.0)) fail("gamma1 must be positive");
    if (!(delta1 > 0.0 && delta1 < 1.0)) fail("delta1 must lie in (0,1)");
    if (!(sigma >= 1.0)) fail("sigma must be >= 1");
    if (!(link_len_min > 0.0 && link_len_min <= link_len_max))
      fail("need 0 < link_len_min <= link_len_max");
    if (!(power_tau >= 0.0)) fail("power_tau must be nonnegative");
  }

  // Extra checks the scheduling engine needs at startup.
  void validate_scheduling() const {
    validate();
    auto fail = [](const std::string& what) {
      throw PreconditionError("invalid scheduling config: " + what);
    };
    if (c0 < c1) fail("c0 < c1 makes the DT threshold unreachable");
    if (c2 < c3) fail("c2 < c3 makes the PF threshold unreachable");
    if (!(c1 > 0.0 && c3 > 0.0)) fail("c1 and c3 must be positive");
    if (!(c_eps >= 0.0)) fail("c_eps must be nonnegative");
    if (!(p_max > 0.0 && p_max <= 1.0)) fail("p_max must lie in (0,1]");
    if (!(c_T > 0.0)) fail("c_T must be positive");
    if (max_epochs < 1) fail("max_epochs must be >= 1");
    if (!(gate_eps > 0.0 && gate_eps < 1.0)) fail("gate_eps must lie in (0,1)");
  }
};

// ---------------------------------------------------------------------------
// JSON mapping. Missing keys keep their defaults; unknown keys are rejected so
// typos in plan files surface immediately.

inline const char* to_string(GateForm g) {
  return g == GateForm::kAlgorithm ? "algorithm" : "proposition";
}
inline const char* to_string(ChargeRule c) {
  switch (c) {
    case ChargeRule::kPerDelivery: return "per_delivery";
    case ChargeRule::kPerAttempt: return "per_attempt";
    case ChargeRule::kPerRound: return "per_round";
  }
  return "per_delivery";
}

inline void to_json(nlohmann::ordered_json& j, const ScenarioConfig& c) {
  j = nlohmann::ordered_json::object();
#define DECAYSIM_TO_JSON(type, name, def) j[#name] = c.name;
  DECAYSIM_CONFIG_FIELDS(DECAYSIM_TO_JSON)
#undef DECAYSIM_TO_JSON
  j["gate_form"] = to_string(c.gate_form);
  j["charge_rule"] = to_string(c.charge_rule);
  j["seed"] = c.seed;
}

// Applies the keys present in `j` on top of `c`.
template <class Json>
void apply_overrides(ScenarioConfig& c, const Json& j) {
  if (!j.is_object()) throw FormatError("config block must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const auto& v = it.value();
    bool known = false;
#define DECAYSIM_FROM_JSON(type, name, def)                                \
  if (key == #name) {                                                      \
    c.name = v.template get<type>();                                       \
    known = true;                                                          \
  }
    DECAYSIM_CONFIG_FIELDS(DECAYSIM_FROM_JSON)
#undef DECAYSIM_FROM_JSON
    if (key == "gate_form") {
      auto s = v.template get<std::string>();
      if (s == "algorithm") c.gate_form = GateForm::kAlgorithm;
      else if (s == "proposition") c.gate_form = GateForm::kProposition;
      else throw FormatError("unknown gate_form '" + s + "'");
      known = true;
    } else if (key == "charge_rule") {
      auto s = v.template get<std::string>();
      if (s == "per_delivery") c.charge_rule = ChargeRule::kPerDelivery;
      else if (s == "per_attempt") c.charge_rule = ChargeRule::kPerAttempt;
      else if (s == "per_round") c.charge_rule = ChargeRule::kPerRound;
      else throw FormatError("unknown charge_rule '" + s + "'");
      known = true;
    } else if (key == "seed") {
      c.seed = v.template get<std::uint64_t>();
      known = true;
    }
    if (!known) throw FormatError("unknown config key '" + key + "'");
  }
}

template <class Json>
ScenarioConfig config_from_json(const Json& j) {
  ScenarioConfig c;
  apply_overrides(c, j);
  return c;
}

// Sets one key from its textual value ("alpha=3.5" style sweeps).
inline void set_config_value(ScenarioConfig& c, const std::string& key,
                             const nlohmann::json& value) {
  nlohmann::json j = nlohmann::json::object();
  j[key] = value;
  apply_overrides(c, j);
}

}  // namespace decaysim
