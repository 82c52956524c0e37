#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "blockprop/params.hpp"

namespace blockprop::aobi {

enum class RoundBranch { OmegaKEqualsOne, OmegaKGreaterOne };

inline const char* to_string(RoundBranch b) {
  return b == RoundBranch::OmegaKEqualsOne ? "omega_k_equals_one" : "omega_k_greater_one";
}

struct ConsensusRounds {
  std::int64_t rounds = 1;  // m + 1
  RoundBranch branch = RoundBranch::OmegaKGreaterOne;
};

/// Rounds of forward-validate cycles until the block has covered all n miners:
/// the smallest m+1 with sum_{j=0}^{m} k (omega k)^j >= n. Closed form is
/// ceil(n/k) when omega*k == 1 and ceil(log_{omega k}((n(omega k - 1) + k)/k))
/// otherwise. Exact-integer logs get a 1e-9 downward nudge before the ceiling
/// so floating error cannot add a spurious round.
inline ConsensusRounds consensus_rounds(std::int64_t n, std::int64_t k, double omega_bar) {
  if (n < 1) throw ValidationError("consensus_rounds: n must be >= 1");
  if (k < 1) throw ValidationError("consensus_rounds: k must be >= 1");
  const double wk = omega_bar * static_cast<double>(k);
  if (wk < 1.0 - kOmegaKUnityTol)
    throw ValidationError("consensus_rounds: omega_bar * k < 1, geometric coverage never reaches n");
  ConsensusRounds out;
  if (std::abs(wk - 1.0) <= kOmegaKUnityTol) {
    out.branch = RoundBranch::OmegaKEqualsOne;
    out.rounds = static_cast<std::int64_t>(
        std::ceil(static_cast<double>(n) / static_cast<double>(k) - 1e-9));
  } else {
    out.branch = RoundBranch::OmegaKGreaterOne;
    const double arg = (static_cast<double>(n) * (wk - 1.0) + static_cast<double>(k)) /
                       static_cast<double>(k);
    out.rounds = static_cast<std::int64_t>(std::ceil(std::log(arg) / std::log(wk) - 1e-9));
  }
  if (out.rounds < 1) out.rounds = 1;
  return out;
}

inline ConsensusRounds consensus_rounds(const NetworkParams& p) {
  return consensus_rounds(p.n_miners, p.k_adjacent, p.omega_bar);
}

/// Network-wide validation time lower bound, seconds: rounds times the
/// per-round mean R_v N B_max^2 / (4 C tau T_p).
inline double validation_time_bound(const NetworkParams& p) {
  const auto cr = consensus_rounds(p);
  const double n = static_cast<double>(p.n_miners);
  const double bmax = static_cast<double>(p.b_max);
  const double per_round = p.r_validate * n * bmax * bmax / (4.0 * p.cloud_compute * p.tau * p.t_pack);
  return static_cast<double>(cr.rounds) * per_round;
}

/// Network-wide communication time lower bound, seconds: rounds times the
/// per-round mean P_size tau T_p omega N / (M R_c W). Each base station covers
/// N / M miners and splits its bandwidth among the willing forwarders.
inline double communication_time_bound(const NetworkParams& p) {
  const auto cr = consensus_rounds(p);
  const double n = static_cast<double>(p.n_miners);
  const double m = static_cast<double>(p.n_base_stations);
  const double per_round = p.p_size * p.tau * p.t_pack * p.omega_bar * n / (m * p.r_c * p.bandwidth_w);
  return static_cast<double>(cr.rounds) * per_round;
}

struct AobiBreakdown {
  double monitoring_term = 0.0;     // (t_pack + t_mine) / 2
  double validation_term = 0.0;
  double communication_term = 0.0;
  double total = 0.0;
  ConsensusRounds rounds;
};

/// Minimum average age of block information: monitoring at the generation-rate
/// bound plus the two service bounds, all evaluated with the same round count.
inline AobiBreakdown min_average_aobi(const NetworkParams& p) {
  validate(p);
  AobiBreakdown b;
  b.rounds = consensus_rounds(p);
  b.monitoring_term = 0.5 * (p.t_pack + p.t_mine);
  b.validation_term = validation_time_bound(p);
  b.communication_term = communication_time_bound(p);
  b.total = b.monitoring_term + b.validation_term + b.communication_term;
  return b;
}

struct MonotonicityReport {
  double condition_value = 0.0;     // B_max sqrt(R_v M R_c W / (C P_size omega))
  bool monotone_increasing = false; // true when condition_value < 2
  double tau_star = 0.0;            // unconstrained minimizer of a*tau + b/tau
  double tau_star_clipped = 0.0;    // minimizer clipped to [1/T_p, B_max/T_p]
};

/// Whether the minimum average AoBI grows monotonically over the whole packing
/// rate range, plus the interior minimizer when it does not. The total is
/// rounds * (a tau + b / tau) + const with a the communication slope and b the
/// validation coefficient, so the unconstrained minimizer is sqrt(b / a).
inline MonotonicityReport monotonicity_condition(const NetworkParams& p) {
  validate(p);
  MonotonicityReport r;
  const double n = static_cast<double>(p.n_miners);
  const double m = static_cast<double>(p.n_base_stations);
  const double bmax = static_cast<double>(p.b_max);
  r.condition_value = bmax * std::sqrt(p.r_validate * m * p.r_c * p.bandwidth_w /
                                       (p.cloud_compute * p.p_size * p.omega_bar));
  r.monotone_increasing = r.condition_value < 2.0;
  const double a = p.p_size * p.t_pack * p.omega_bar * n / (m * p.r_c * p.bandwidth_w);
  const double b = p.r_validate * n * bmax * bmax / (4.0 * p.cloud_compute * p.t_pack);
  r.tau_star = std::sqrt(b / a);
  const double lo = 1.0 / p.t_pack;
  const double hi = bmax / p.t_pack;
  r.tau_star_clipped = std::min(std::max(r.tau_star, lo), hi);
  return r;
}

/// Pointwise minimum-AoBI evaluation over a packing-rate grid, input order
/// preserved. Each point is validated; an out-of-range tau rejects.
inline std::vector<std::pair<double, AobiBreakdown>> aobi_tau_sweep(
    const NetworkParams& base, const std::vector<double>& tau_grid) {
  std::vector<std::pair<double, AobiBreakdown>> out;
  out.reserve(tau_grid.size());
  for (double t : tau_grid) {
    NetworkParams p = base;
    p.tau = t;
    out.emplace_back(t, min_average_aobi(p));
  }
  return out;
}

}  // namespace blockprop::aobi
