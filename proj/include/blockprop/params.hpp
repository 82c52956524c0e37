#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace blockprop {

/// Thrown whenever a parameter container rejects its input. The message names
/// the field and the violated bound.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Values of omega_bar * k this close to 1 select the ceiling branch of the
/// round-count formula; the log-base form is singular there.
inline constexpr double kOmegaKUnityTol = 1e-12;

/// Physical and blockchain constants shared by every model.
///
/// Immutable after construction; construction checks every bound, so a value
/// of this type is always internally consistent.
struct NetworkParams {
  std::int64_t n_miners = 4000;
  std::int64_t n_base_stations = 100;
  std::int64_t k_adjacent = 3;         // fan-out per forwarding miner
  double cloud_compute = 1e13;         // instructions per second
  std::int64_t b_max = 100;            // max transactions per block
  double t_pack = 20.0;                // packing period, s
  double t_mine = 600.0;               // mining period, s
  double r_validate = 1e6;             // instructions per transaction
  double p_size = 300.0;               // bits per transaction
  double r_c = 200.0;                  // effective bit rate per unit bandwidth
  double bandwidth_w = 1e4;            // bandwidth units per base station
  double omega_bar = 0.8;              // density of forwarding-willing neighbors
  double tau = 1.0;                    // packing rate of the bookkeeper, tx/s
  double lambda_rate = 1.0 / 620.0;    // transaction generation rate, tx/s

  double omega_k() const { return omega_bar * static_cast<double>(k_adjacent); }
  bool omega_k_is_unity() const { return std::abs(omega_k() - 1.0) <= kOmegaKUnityTol; }
  /// Transactions actually packed into one block.
  double block_size() const { return tau * t_pack; }
};

inline void validate(const NetworkParams& p) {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (p.n_miners < 1) fail("n_miners must be >= 1");
  if (p.n_base_stations < 1) fail("n_base_stations must be >= 1");
  if (p.k_adjacent < 1) fail("k_adjacent must be >= 1");
  if (p.b_max < 1) fail("b_max must be >= 1");
  if (!(p.cloud_compute > 0)) fail("cloud_compute must be > 0");
  if (!(p.t_pack > 0)) fail("t_pack must be > 0");
  if (!(p.t_mine > 0)) fail("t_mine must be > 0");
  if (!(p.r_validate > 0)) fail("r_validate must be > 0");
  if (!(p.p_size > 0)) fail("p_size must be > 0");
  if (!(p.r_c > 0)) fail("r_c must be > 0");
  if (!(p.bandwidth_w > 0)) fail("bandwidth_w must be > 0");
  if (!(p.omega_bar > 0 && p.omega_bar <= 1.0)) fail("omega_bar must lie in (0, 1]");
  // one-ulp slack so exact range endpoints survive grid arithmetic
  if (p.tau < (1.0 / p.t_pack) * (1.0 - 1e-12))
    fail("tau below 1/t_pack (block would hold less than one transaction)");
  if (p.tau > (static_cast<double>(p.b_max) / p.t_pack) * (1.0 + 1e-12))
    fail("tau above b_max/t_pack (block would exceed b_max transactions)");
  if (!(p.lambda_rate > 0)) fail("lambda_rate must be > 0");
  if (p.lambda_rate > 1.0 / (p.t_pack + p.t_mine))
    fail("lambda_rate above 1/(t_pack + t_mine): monitoring would lag consensus");
  if (p.omega_k() < 1.0 - kOmegaKUnityTol)
    fail("omega_bar * k_adjacent must be >= 1 (coverage never reaches the whole network)");
}

inline NetworkParams validate_network_params(NetworkParams raw) {
  validate(raw);
  return raw;
}

/// Per-round conversion probabilities of the five-state propagation model.
struct PropagationProbabilities {
  double p_f = 0.5;  // forwarding
  double p_e = 0.1;  // evil
  double p_r = 0.3;  // recovery
  double p_i = 0.2;  // immunity
};

inline PropagationProbabilities validate_probabilities(PropagationProbabilities p) {
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(p.p_f)) throw ValidationError("p_f must lie in [0, 1]");
  if (!in01(p.p_e)) throw ValidationError("p_e must lie in [0, 1]");
  if (!in01(p.p_r)) throw ValidationError("p_r must lie in [0, 1]");
  if (!(p.p_i > 0.0 && p.p_i <= 1.0)) throw ValidationError("p_i must lie in (0, 1]");
  return p;
}

/// Rewards and costs of the propagation game. Constructed from the raw
/// quantities so the deltas can never drift out of sync with them.
struct PayoffParams {
  double reward_validate = 0.0;
  double cost_validate = 0.0;
  double reward_propagate = 0.0;
  double cost_propagate = 0.0;
  double extra_reward = 0.0;      // paid when both sides forward
  double delta_p = 0.0;           // validation reward minus cost, always positive
  double delta_u = 0.0;           // propagation reward minus cost, may be negative
  double punishment_risk = 0.0;
  double epsilon = 0.1;           // unit cost of the punishment risk

  double risk_cost() const { return epsilon * punishment_risk; }

  static PayoffParams from_raw(double reward_validate, double cost_validate,
                               double reward_propagate, double cost_propagate,
                               double extra_reward, double punishment_risk,
                               double epsilon) {
    PayoffParams p;
    p.reward_validate = reward_validate;
    p.cost_validate = cost_validate;
    p.reward_propagate = reward_propagate;
    p.cost_propagate = cost_propagate;
    p.extra_reward = extra_reward;
    p.punishment_risk = punishment_risk;
    p.epsilon = epsilon;
    p.delta_p = reward_validate - cost_validate;
    p.delta_u = reward_propagate - cost_propagate;
    p.check();
    return p;
  }

  /// Convenience constructor when only the aggregate quantities matter.
  static PayoffParams from_deltas(double delta_i, double delta_p, double delta_u,
                                  double punishment_risk, double epsilon) {
    return from_raw(delta_p, 0.0, delta_u, 0.0, delta_i, punishment_risk, epsilon);
  }

  void check() const {
    if (!(delta_p > 0.0))
      throw ValidationError("delta_p (validation reward minus cost) must be positive");
    if (extra_reward < 0.0) throw ValidationError("extra_reward must be >= 0");
    if (punishment_risk < 0.0) throw ValidationError("punishment_risk must be >= 0");
    if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Config parsing. Flat "key = value" files and JSON objects share the same
// key names, which match the NetworkParams field names exactly.

namespace detail {

inline void apply_network_key(NetworkParams& p, const std::string& key, const std::string& value) {
  auto as_i64 = [&]() -> std::int64_t {
    try {
      return std::stoll(value);
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
  };
  auto as_f64 = [&]() -> double {
    try {
      return std::stod(value);
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "': expected a number, got '" + value + "'");
    }
  };
  if (key == "n_miners") p.n_miners = as_i64();
  else if (key == "n_base_stations") p.n_base_stations = as_i64();
  else if (key == "k_adjacent") p.k_adjacent = as_i64();
  else if (key == "cloud_compute") p.cloud_compute = as_f64();
  else if (key == "b_max") p.b_max = as_i64();
  else if (key == "t_pack") p.t_pack = as_f64();
  else if (key == "t_mine") p.t_mine = as_f64();
  else if (key == "r_validate") p.r_validate = as_f64();
  else if (key == "p_size") p.p_size = as_f64();
  else if (key == "r_c") p.r_c = as_f64();
  else if (key == "bandwidth_w") p.bandwidth_w = as_f64();
  else if (key == "omega_bar") p.omega_bar = as_f64();
  else if (key == "tau") p.tau = as_f64();
  else if (key == "lambda_rate") p.lambda_rate = as_f64();
  else throw ValidationError("unknown config key '" + key + "'");
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parse network parameters from text that is either a JSON object or a flat
/// key = value listing (# starts a comment). Keys absent from the text keep
/// the values already in `base`.
inline NetworkParams parse_network_params(const std::string& text, const NetworkParams& base) {
  NetworkParams p = base;
  const std::string body = detail::trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("config JSON parse failure: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::ostringstream v;
      if (it.value().is_string()) v << it.value().get<std::string>();
      else v << it.value();
      detail::apply_network_key(p, it.key(), v.str());
    }
  } else {
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ValidationError("config line without '=': '" + line + "'");
      detail::apply_network_key(p, detail::trim(line.substr(0, eq)),
                                detail::trim(line.substr(eq + 1)));
    }
  }
  return validate_network_params(p);
}

inline NetworkParams parse_network_params(const std::string& text) {
  return parse_network_params(text, NetworkParams{});
}

inline NetworkParams load_network_params(const std::string& path,
                                         const NetworkParams& base = NetworkParams{}) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_network_params(ss.str(), base);
}

}  // namespace blockprop
