#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "blockprop/evogame.hpp"
#include "blockprop/rng.hpp"

using namespace blockprop;
using namespace blockprop::evogame;

namespace {

PayoffParams canonical() { return PayoffParams::from_deltas(0.3, 0.5, 0.2, 1.0, 0.1); }

PayoffParams random_pay(CounterRng& rng) {
  const double di = rng.uniform();
  const double dp = 0.05 + rng.uniform();
  const double du = 2.0 * rng.uniform() - 1.0;
  const double risk = rng.uniform();
  return PayoffParams::from_deltas(di, dp, du, risk, 0.1);
}

}  // namespace

TEST_CASE("receiver payoffs scale with the propagator level") {
  const auto r = expected_revenues({0.0, 0.6}, canonical());
  CHECK(r.g2y == 0.0);
  CHECK(r.g2n == 0.0);
  CHECK(r.g2 == 0.0);
}

TEST_CASE("full receiver cooperation removes the punishment term") {
  const auto pay = canonical();
  const auto r = expected_revenues({0.4, 1.0}, pay);
  CHECK(r.g1y == Catch::Approx(pay.extra_reward + pay.delta_u + pay.delta_p));
}

TEST_CASE("propagator forwarding revenue at the worked example") {
  const auto r = expected_revenues({0.5, 0.5}, canonical());
  CHECK(r.g1y == Catch::Approx(0.80));
  CHECK(r.g1n == Catch::Approx(0.25));
  CHECK(r.g1 == Catch::Approx(0.5 * 0.80 + 0.5 * 0.25));
  CHECK(r.g2y == Catch::Approx(0.5));
  CHECK(r.g2n == Catch::Approx(0.25));
  CHECK(r.g2 == Catch::Approx(0.375));
}

TEST_CASE("replicator velocities at the worked example") {
  const auto d = replicator_rhs({0.5, 0.5}, canonical());
  CHECK(d.x == Catch::Approx(0.1375));
  CHECK(d.y == Catch::Approx(0.0625));
}

TEST_CASE("boundary faces are fixed") {
  const auto pay = canonical();
  for (double y : {0.0, 0.3, 1.0}) {
    CHECK(replicator_rhs({0.0, y}, pay).x == 0.0);
    CHECK(replicator_rhs({1.0, y}, pay).x == 0.0);
    CHECK(replicator_rhs({0.0, y}, pay).y == 0.0);
  }
  for (double x : {0.0, 0.4, 1.0}) {
    CHECK(replicator_rhs({x, 0.0}, pay).y == 0.0);
    CHECK(replicator_rhs({x, 1.0}, pay).y == 0.0);
  }
}

TEST_CASE("zero net propagation reward freezes the receivers") {
  const auto pay = PayoffParams::from_deltas(0.3, 0.5, -0.3, 1.0, 0.1);
  REQUIRE(pay.extra_reward + pay.delta_u == Catch::Approx(0.0));
  for (double x : {0.2, 0.5, 0.9})
    for (double y : {0.2, 0.5, 0.9}) CHECK(replicator_rhs({x, y}, pay).y == Catch::Approx(0.0));
}

TEST_CASE("velocity vanishes on the receiver-threshold line") {
  const auto pay = canonical();
  const double thr = receiver_threshold(pay);
  for (double x : {0.2, 0.5, 0.8})
    CHECK(std::abs(replicator_rhs({x, thr}, pay).x) < 1e-15);
}

TEST_CASE("threshold special values") {
  // delta_u equal to the risk cost puts the threshold at zero
  const auto pay0 = PayoffParams::from_deltas(0.3, 0.5, 0.1, 1.0, 0.1);
  CHECK(receiver_threshold(pay0) == Catch::Approx(0.0));
  // worked example: negative threshold, always-above regime
  CHECK(receiver_threshold(canonical()) == Catch::Approx(-0.1 / 0.9));
  // strongly negative propagation rewards push the threshold above one
  const auto pay1 = PayoffParams::from_deltas(0.05, 0.3, -0.6, 1.0, 0.1);
  CHECK(pay1.extra_reward + pay1.delta_p + pay1.delta_u < 0.0);
  CHECK(receiver_threshold(pay1) > 1.0);
}

TEST_CASE("closed-form Jacobian matches central differences") {
  CounterRng rng(31337);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const auto pay = random_pay(rng);
    const GameState st{0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform()};
    const auto jc = jacobian(st, pay);
    auto fd = [&](int row, int col) {
      GameState lo = st, hi = st;
      (col == 0 ? lo.x : lo.y) -= h;
      (col == 0 ? hi.x : hi.y) += h;
      const auto dlo = replicator_rhs(lo, pay);
      const auto dhi = replicator_rhs(hi, pay);
      return ((row == 0 ? dhi.x : dhi.y) - (row == 0 ? dlo.x : dlo.y)) / (2.0 * h);
    };
    const double entries[4] = {jc.dxdx, jc.dxdy, jc.dydx, jc.dydy};
    const double approx[4] = {fd(0, 0), fd(0, 1), fd(1, 0), fd(1, 1)};
    for (int i = 0; i < 4; ++i) {
      const double scale = std::max(1.0, std::abs(entries[i]));
      CHECK(std::abs(entries[i] - approx[i]) / scale < 1e-6);
    }
  }
}

TEST_CASE("corner classification follows the published determinant and trace") {
  const auto reports = classify_equilibria(canonical());
  REQUIRE(reports.size() == 3);

  CHECK(reports[0].point.x == 0.0);
  CHECK(reports[0].point.y == 0.0);
  CHECK(reports[0].det_j == 0.0);
  CHECK(reports[0].tr_j == Catch::Approx(0.1));  // delta_u - risk cost
  CHECK(reports[0].classification == Stability::Saddle);

  CHECK(reports[1].point.x == 1.0);
  CHECK(reports[1].point.y == 0.0);
  CHECK(reports[1].det_j == 0.0);
  CHECK(reports[1].tr_j == Catch::Approx(1.0));  // di + dp + du
  CHECK(reports[1].classification == Stability::Saddle);

  CHECK(reports[2].point.x == 1.0);
  CHECK(reports[2].point.y == 1.0);
  CHECK(reports[2].det_j == Catch::Approx(0.5 * 1.0));
  CHECK(reports[2].tr_j == Catch::Approx(-1.5));
  CHECK(reports[2].classification == Stability::Ess);
}

TEST_CASE("the cooperative corner is stable exactly when propagation pays") {
  CounterRng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pay = random_pay(rng);
    const double iu = pay.extra_reward + pay.delta_u;
    if (std::abs(iu) < 1e-3) continue;  // keep away from the degenerate boundary
    const auto reports = classify_equilibria(pay);
    CHECK(reports[0].classification == Stability::Saddle);
    CHECK(reports[1].classification == Stability::Saddle);
    CHECK((reports[2].classification == Stability::Ess) == (iu > 0.0));
  }
}

TEST_CASE("boundary starts stay fixed") {
  const auto sol = solve_game(1.0, 1.0, canonical(), 1000, 1e-9);
  CHECK(sol.converged);
  CHECK(sol.steps == 0);
  CHECK(sol.terminal.x == 1.0);
  CHECK(sol.terminal.y == 1.0);
}

TEST_CASE("cooperative regime converges to the incentive corner") {
  const auto sol = solve_game(0.2, 0.2, canonical(), 10000, 1e-9);
  CHECK(sol.converged);
  CHECK(std::abs(sol.terminal.x - 1.0) < 1e-3);
  CHECK(std::abs(sol.terminal.y - 1.0) < 1e-3);
}

TEST_CASE("hostile regime drives the propagators out") {
  // threshold above one, negative propagation surplus: x falls to zero and the
  // receiver level only ever declines
  const auto pay = PayoffParams::from_deltas(0.05, 0.3, -0.6, 1.0, 0.1);
  const auto sol = solve_game(0.5, 0.5, pay, 200000, 1e-12);
  CHECK(std::abs(sol.terminal.x) < 1e-6);
  for (std::size_t i = 1; i < sol.trajectory.size(); ++i)
    CHECK(sol.trajectory[i].y <= sol.trajectory[i - 1].y + 1e-15);
}

TEST_CASE("mixed regime: propagators rise while receivers defect, then fall") {
  // above threshold the propagators first gain, the receiver decline then
  // flips the incentive sign
  const auto pay = PayoffParams::from_deltas(0.1, 0.6, -0.3, 2.0, 0.1);
  REQUIRE(receiver_threshold(pay) == Catch::Approx(0.5 / 0.9));
  const auto sol = solve_game(0.3, 0.8, pay, 200000, 1e-12);
  double peak = 0.0;
  for (const auto& st : sol.trajectory) peak = std::max(peak, st.x);
  CHECK(peak > 0.3);                       // initial rise
  CHECK(sol.terminal.x < 0.3);             // eventual fall below the start
  CHECK(sol.terminal.x < 1e-3);
}

TEST_CASE("trajectories stay inside the unit square") {
  CounterRng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto pay = random_pay(rng);
    const auto sol = solve_game(rng.uniform(), rng.uniform(), pay, 20000, 1e-9);
    for (const auto& st : sol.trajectory) {
      CHECK(st.x >= -1e-9);
      CHECK(st.x <= 1.0 + 1e-9);
      CHECK(st.y >= -1e-9);
      CHECK(st.y <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  // velocity tolerance of zero can never be met
  const auto sol = solve_game(0.5, 0.5, canonical(), 50, 0.0);
  CHECK_FALSE(sol.converged);
  CHECK(sol.steps == 50);
}

TEST_CASE("portrait preserves start order and matches single solves") {
  const std::vector<GameState> starts{{0.2, 0.2}, {0.8, 0.3}, {0.5, 0.9}};
  const auto sols = phase_portrait(canonical(), starts, 10000, 1e-9);
  REQUIRE(sols.size() == starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto single = solve_game(starts[i].x, starts[i].y, canonical(), 10000, 1e-9);
    CHECK(sols[i].terminal.x == single.terminal.x);
    CHECK(sols[i].terminal.y == single.terminal.y);
    CHECK(sols[i].trajectory.front().x == starts[i].x);
  }
}

TEST_CASE("stronger extra reward never slows receiver adoption") {
  // epochs until the receiver level first clears 0.99
  auto epochs_to_99 = [](double di) {
    const auto pay = PayoffParams::from_deltas(di, 0.5, 0.2, 1.0, 0.1);
    const auto series = receiver_series(0.2, 0.2, pay, 80);
    for (std::size_t e = 0; e < series.size(); ++e)
      if (series[e] > 0.99) return static_cast<std::int64_t>(e);
    return static_cast<std::int64_t>(series.size());
  };
  std::int64_t prev = epochs_to_99(0.05);
  for (double di : {0.1, 0.2, 0.4, 0.8}) {
    const auto cur = epochs_to_99(di);
    CHECK(cur <= prev);
    prev = cur;
  }
}
