#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "blockprop/params.hpp"
#include "blockprop/rk4.hpp"

namespace blockprop::epidemic {

/// Proportions of the five miner populations at one instant. Components sum
/// to one; integration may leave microscopic negative dust, clamped on read.
struct StateDensities {
  double ignorant = 0.0;
  double spreader = 0.0;
  double unspreader = 0.0;
  double refuser = 0.0;
  double evildoer = 0.0;

  double sum() const { return ignorant + spreader + unspreader + refuser + evildoer; }

  std::array<double, 5> to_array() const {
    return {ignorant, spreader, unspreader, refuser, evildoer};
  }
  static StateDensities from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }

  /// Copy with components clamped to [0, 1] for reporting.
  StateDensities clamped() const {
    auto c = [](double v) { return std::min(1.0, std::max(0.0, v)); };
    return {c(ignorant), c(spreader), c(unspreader), c(refuser), c(evildoer)};
  }

  void check() const {
    constexpr double slack = 1e-12;
    for (double v : to_array())
      if (v < -slack || v > 1.0 + slack)
        throw ValidationError("state density outside [0, 1]");
    if (std::abs(sum() - 1.0) > 1e-9)
      throw ValidationError("state densities do not sum to 1");
  }
};

/// One ignorant pool with a single seeded spreader: i = (n-1)/n, s = 1/n.
inline StateDensities initial_densities(std::int64_t n) {
  if (n < 2) throw ValidationError("initial_densities: need n >= 2 miners");
  StateDensities d;
  d.ignorant = static_cast<double>(n - 1) / static_cast<double>(n);
  d.spreader = 1.0 / static_cast<double>(n);
  return d;
}

/// Mean-field right-hand side of the five-state propagation model. The five
/// derivatives cancel term by term, so the total density is conserved exactly.
inline StateDensities ode_rhs(const StateDensities& st, const PropagationProbabilities& pr,
                              std::int64_t k_adjacent) {
  const double i = st.ignorant, s = st.spreader, u = st.unspreader, e = st.evildoer;
  const double k = static_cast<double>(k_adjacent);
  const double contact = k * (1.0 - pr.p_e) * s * i;
  StateDensities d;
  d.ignorant = pr.p_r * e - pr.p_e * i - contact;
  d.spreader = pr.p_f * contact - pr.p_i * (1.0 + k * s) * s;
  d.unspreader = (1.0 - pr.p_f) * contact - pr.p_i * u;
  d.refuser = pr.p_i * (1.0 + k * s) * s + pr.p_i * u;
  d.evildoer = pr.p_e * i - pr.p_r * e;
  return d;
}

struct EpidemicTrajectory {
  std::vector<double> times;
  std::vector<StateDensities> states;  // clamped copies, normalized within 1e-9
  PropagationProbabilities probs;
  std::int64_t k_adjacent = 0;

  const StateDensities& terminal() const { return states.back(); }
};

/// Default grid: extinction is reached well inside horizon 500 for the
/// probability grids exercised by the experiment presets.
inline constexpr double kDefaultStep = 0.01;
inline constexpr double kDefaultHorizon = 500.0;

/// Fixed-step RK4 integration of the mean-field model from `start`. The raw
/// state advances unclamped; reported states are clamped to [0, 1]. A step
/// large enough to throw any component out of [-1e-3, 1 + 1e-3] rejects.
inline EpidemicTrajectory integrate(const StateDensities& start,
                                    const PropagationProbabilities& probs,
                                    std::int64_t k_adjacent, double horizon = kDefaultHorizon,
                                    double step = kDefaultStep) {
  if (!(step > 0.0)) throw ValidationError("integrate: step must be > 0");
  if (horizon < step) throw ValidationError("integrate: horizon must be >= step");
  validate_probabilities(probs);
  start.check();

  auto rhs = [&](const std::array<double, 5>& y) {
    return ode_rhs(StateDensities::from_array(y), probs, k_adjacent).to_array();
  };

  EpidemicTrajectory traj;
  traj.probs = probs;
  traj.k_adjacent = k_adjacent;
  const auto steps = static_cast<std::int64_t>(std::llround(horizon / step));
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);

  std::array<double, 5> y = start.to_array();
  traj.times.push_back(0.0);
  traj.states.push_back(StateDensities::from_array(y).clamped());
  for (std::int64_t n = 1; n <= steps; ++n) {
    y = rk4_step(y, step, rhs);
    for (double v : y)
      if (v < -1e-3 || v > 1.0 + 1e-3)
        throw ValidationError("integrate: state left [0, 1] by more than 1e-3; use a smaller step");
    traj.times.push_back(static_cast<double>(n) * step);
    traj.states.push_back(StateDensities::from_array(y).clamped());
  }
  return traj;
}

struct SteadyState {
  double sigma = 0.0;        // (1 - p_e) p_f / p_i + 1
  double r_infinity = 0.0;   // consensus level, in [0, 1)
  bool nontrivial = false;   // false when sigma <= 1 (only the zero root exists)
};

inline double sigma_of(const PropagationProbabilities& p) {
  return (1.0 - p.p_e) * p.p_f / p.p_i + 1.0;
}

/// Terminal refuser fraction: the root of r = 1 - exp(-sigma r). For sigma > 1
/// the unique root in (0, 1) is bracketed by bisection on the convex auxiliary
/// f(x) = x + exp(-sigma x) - 1, which is negative near 0 and positive at 1.
/// The trivial root at 0 repels the bracket, so convergence is unconditional.
inline SteadyState steady_state_from_sigma(double sigma) {
  SteadyState out;
  out.sigma = sigma;
  if (sigma <= 1.0) return out;
  double lo = 1e-9, hi = 1.0;
  auto f = [sigma](double x) { return x + std::exp(-sigma * x) - 1.0; };
  // f(lo) < 0 for sigma > 1; f(1) = exp(-sigma) > 0.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) lo = mid; else hi = mid;
    if (hi - lo < 1e-15) break;
  }
  out.r_infinity = 0.5 * (lo + hi);
  out.nontrivial = true;
  return out;
}

inline SteadyState steady_state(const PropagationProbabilities& probs) {
  validate_probabilities(probs);
  return steady_state_from_sigma(sigma_of(probs));
}

/// Which probability a surface axis ranges over.
enum class ProbAxis { Forwarding, Evil, Immunity };

struct ConsensusSurface {
  ProbAxis axis1 = ProbAxis::Forwarding;
  ProbAxis axis2 = ProbAxis::Immunity;
  std::vector<double> axis1_values;
  std::vector<double> axis2_values;
  std::vector<double> r_infinity;  // row-major: axis1 index major

  double at(std::size_t i1, std::size_t i2) const {
    return r_infinity[i1 * axis2_values.size() + i2];
  }
};

/// Consensus-level samples over a grid of two probabilities with the third
/// held inside `base`.
inline ConsensusSurface consensus_level_surface(PropagationProbabilities base, ProbAxis axis1,
                                                const std::vector<double>& axis1_values,
                                                ProbAxis axis2,
                                                const std::vector<double>& axis2_values) {
  if (axis1 == axis2) throw ValidationError("consensus_level_surface: axes must differ");
  ConsensusSurface s;
  s.axis1 = axis1;
  s.axis2 = axis2;
  s.axis1_values = axis1_values;
  s.axis2_values = axis2_values;
  s.r_infinity.reserve(axis1_values.size() * axis2_values.size());
  auto set = [](PropagationProbabilities& p, ProbAxis a, double v) {
    switch (a) {
      case ProbAxis::Forwarding: p.p_f = v; break;
      case ProbAxis::Evil: p.p_e = v; break;
      case ProbAxis::Immunity: p.p_i = v; break;
    }
  };
  for (double v1 : axis1_values) {
    for (double v2 : axis2_values) {
      PropagationProbabilities p = base;
      set(p, axis1, v1);
      set(p, axis2, v2);
      s.r_infinity.push_back(steady_state(p).r_infinity);
    }
  }
  return s;
}

inline const char* to_string(ProbAxis a) {
  switch (a) {
    case ProbAxis::Forwarding: return "p_f";
    case ProbAxis::Evil: return "p_e";
    case ProbAxis::Immunity: return "p_i";
  }
  return "?";
}

}  // namespace blockprop::epidemic
