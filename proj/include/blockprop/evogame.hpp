#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "blockprop/params.hpp"
#include "blockprop/rk4.hpp"

namespace blockprop::evogame {

/// Forwarding probabilities of the two populations: block propagators (x) and
/// block receivers (y).
struct GameState {
  double x = 0.0;
  double y = 0.0;
};

struct Revenues {
  double g1y = 0.0;  // propagator forwards
  double g1n = 0.0;  // propagator withholds
  double g1 = 0.0;   // propagator group average
  double g2y = 0.0;  // receiver forwards
  double g2n = 0.0;  // receiver withholds
  double g2 = 0.0;   // receiver group average
};

inline Revenues expected_revenues(const GameState& st, const PayoffParams& pay) {
  const double x = st.x, y = st.y;
  const double er = pay.risk_cost();
  Revenues r;
  r.g1y = y * pay.extra_reward + pay.delta_u + pay.delta_p - (1.0 - y) * er;
  r.g1n = (1.0 - y) * pay.delta_p;
  r.g1 = x * r.g1y + (1.0 - x) * r.g1n;
  r.g2y = x * (pay.extra_reward + pay.delta_u + pay.delta_p);
  r.g2n = x * pay.delta_p;
  r.g2 = y * r.g2y + (1.0 - y) * r.g2n;
  return r;
}

/// Replicator velocities. Each probability grows in proportion to its
/// strategy's advantage over the group average; the x(1-x) and y(1-y) factors
/// pin the boundary faces, so [0,1]^2 is flow-invariant.
inline GameState replicator_rhs(const GameState& st, const PayoffParams& pay) {
  const double x = st.x, y = st.y;
  const double er = pay.risk_cost();
  GameState d;
  d.x = x * (1.0 - x) * (y * (pay.extra_reward + pay.delta_p + er) + pay.delta_u - er);
  d.y = x * y * (1.0 - y) * (pay.extra_reward + pay.delta_u);
  return d;
}

/// Receiver forwarding level at which the propagator velocity vanishes
/// identically. May fall outside [0, 1]: negative means every feasible y sits
/// above it; above 1 means every feasible y sits below it.
inline double receiver_threshold(const PayoffParams& pay) {
  const double denom = pay.extra_reward + pay.delta_p + pay.risk_cost();
  if (denom == 0.0) throw ValidationError("receiver_threshold: zero denominator");
  return (-pay.delta_u + pay.risk_cost()) / denom;
}

/// Jacobian of the replicator velocities at an arbitrary state.
struct Jacobian {
  double dxdx = 0.0, dxdy = 0.0, dydx = 0.0, dydy = 0.0;
  double det() const { return dxdx * dydy - dxdy * dydx; }
  double tr() const { return dxdx + dydy; }
};

inline Jacobian jacobian(const GameState& st, const PayoffParams& pay) {
  const double x = st.x, y = st.y;
  const double er = pay.risk_cost();
  const double a = pay.extra_reward + pay.delta_p + er;
  const double iu = pay.extra_reward + pay.delta_u;
  Jacobian j;
  j.dxdx = (1.0 - 2.0 * x) * (y * a + pay.delta_u - er);
  j.dxdy = x * (1.0 - x) * a;
  j.dydx = y * (1.0 - y) * iu;
  j.dydy = x * iu * (1.0 - 2.0 * y);
  return j;
}

enum class Stability { Ess, Saddle, Unstable, Degenerate };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Ess: return "ESS";
    case Stability::Saddle: return "Saddle";
    case Stability::Unstable: return "Unstable";
    case Stability::Degenerate: return "Degenerate";
  }
  return "?";
}

struct EquilibriumReport {
  GameState point;
  double det_j = 0.0;
  double tr_j = 0.0;
  Stability classification = Stability::Degenerate;
};

inline Stability classify(double det, double tr) {
  if (det > 0.0) {
    if (tr < 0.0) return Stability::Ess;
    if (tr > 0.0) return Stability::Unstable;
    return Stability::Degenerate;  // center, linearization inconclusive
  }
  if (det == 0.0 && tr == 0.0) return Stability::Degenerate;
  // det < 0, or det == 0 with a nonzero trace; linearization alone cannot
  // attract, so the corner keeps its saddle label
  return Stability::Saddle;
}

/// Stability of the three equilibrium corners from the closed-form
/// determinant and trace at each point.
inline std::vector<EquilibriumReport> classify_equilibria(const PayoffParams& pay) {
  const double iu = pay.extra_reward + pay.delta_u;
  const double ipu = pay.extra_reward + pay.delta_p + pay.delta_u;
  std::vector<EquilibriumReport> out(3);

  out[0].point = {0.0, 0.0};
  out[0].det_j = 0.0;
  out[0].tr_j = pay.delta_u - pay.risk_cost();

  out[1].point = {1.0, 0.0};
  out[1].det_j = 0.0;
  out[1].tr_j = ipu;

  out[2].point = {1.0, 1.0};
  out[2].det_j = iu * ipu;
  out[2].tr_j = -2.0 * iu - pay.delta_p;

  for (auto& r : out) r.classification = classify(r.det_j, r.tr_j);
  return out;
}

struct GameSolution {
  std::vector<GameState> trajectory;  // one entry per integration step, t0 first
  GameState terminal;
  bool converged = false;             // velocity fell below tol
  std::int64_t steps = 0;
};

/// Fixed RK4 step for the replicator flow; twenty steps make one reporting
/// epoch in the experiment layer.
inline constexpr double kGameStep = 0.05;
inline constexpr std::int64_t kStepsPerEpoch = 20;

/// Integrate the replicator flow until the velocity drops below tol in the
/// max norm or the step budget runs out. Non-convergence is reported, not
/// thrown: sweeps legitimately cross regimes where the flow stalls.
inline GameSolution solve_game(double x0, double y0, const PayoffParams& pay,
                               std::int64_t max_steps = 100000, double tol = 1e-9,
                               double step = kGameStep) {
  if (x0 < 0.0 || x0 > 1.0 || y0 < 0.0 || y0 > 1.0)
    throw ValidationError("solve_game: start must lie in [0, 1]^2");
  pay.check();

  auto rhs = [&pay](const std::array<double, 2>& v) {
    GameState d = replicator_rhs({v[0], v[1]}, pay);
    return std::array<double, 2>{d.x, d.y};
  };

  GameSolution sol;
  std::array<double, 2> v{x0, y0};
  sol.trajectory.push_back({v[0], v[1]});
  for (std::int64_t n = 0; n < max_steps; ++n) {
    const auto vel = rhs(v);
    if (std::max(std::abs(vel[0]), std::abs(vel[1])) < tol) {
      sol.converged = true;
      break;
    }
    v = rk4_step(v, step, rhs);
    sol.trajectory.push_back({v[0], v[1]});
    ++sol.steps;
  }
  sol.terminal = sol.trajectory.back();
  return sol;
}

/// One solve per start, assembled in input order.
inline std::vector<GameSolution> phase_portrait(const PayoffParams& pay,
                                                const std::vector<GameState>& starts,
                                                std::int64_t max_steps = 100000,
                                                double tol = 1e-9) {
  std::vector<GameSolution> out;
  out.reserve(starts.size());
  for (const auto& s : starts) out.push_back(solve_game(s.x, s.y, pay, max_steps, tol));
  return out;
}

/// Receiver forwarding level per reporting epoch, driving the incentive
/// mechanism inside the agent simulation.
inline std::vector<double> receiver_series(double x0, double y0, const PayoffParams& pay,
                                           std::int64_t epochs) {
  auto rhs = [&pay](const std::array<double, 2>& v) {
    GameState d = replicator_rhs({v[0], v[1]}, pay);
    return std::array<double, 2>{d.x, d.y};
  };
  std::vector<double> out;
  out.reserve(epochs + 1);
  std::array<double, 2> v{x0, y0};
  out.push_back(v[1]);
  for (std::int64_t e = 0; e < epochs; ++e) {
    for (std::int64_t s = 0; s < kStepsPerEpoch; ++s) v = rk4_step(v, kGameStep, rhs);
    out.push_back(v[1]);
  }
  return out;
}

}  // namespace blockprop::evogame
