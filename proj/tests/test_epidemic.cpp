#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "blockprop/epidemic.hpp"
#include "blockprop/rng.hpp"

using namespace blockprop;
using namespace blockprop::epidemic;

namespace {

/// Fixed-point oracle for the consensus level: x <- 1 - exp(-sigma x).
double r_inf_fixed_point(double sigma) {
  double x = 0.5;
  for (int i = 0; i < 100000; ++i) {
    const double nx = 1.0 - std::exp(-sigma * x);
    if (std::abs(nx - x) < 1e-12) return nx;
    x = nx;
  }
  return x;
}

constexpr PropagationProbabilities kCanonical{0.5, 0.1, 0.3, 0.2};  // p_f, p_e, p_r, p_i

double max_abs_diff(const StateDensities& a, const StateDensities& b) {
  double m = 0.0;
  const auto va = a.to_array(), vb = b.to_array();
  for (int i = 0; i < 5; ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  return m;
}

}  // namespace

TEST_CASE("initial densities seed a single spreader") {
  const auto d2 = initial_densities(2);
  CHECK(d2.ignorant == Catch::Approx(0.5));
  CHECK(d2.spreader == Catch::Approx(0.5));
  CHECK(d2.unspreader == 0.0);
  CHECK(d2.refuser == 0.0);
  CHECK(d2.evildoer == 0.0);

  const auto d = initial_densities(4000);
  CHECK(d.ignorant == Catch::Approx(0.99975));
  CHECK(d.spreader == Catch::Approx(0.00025));
  for (std::int64_t n : {2, 3, 7, 4000, 999983})
    CHECK(initial_densities(n).sum() == Catch::Approx(1.0).margin(0.0));

  CHECK_THROWS_AS(initial_densities(1), ValidationError);
}

TEST_CASE("all-ignorant state only trades with the evildoers") {
  const StateDensities st{1.0, 0.0, 0.0, 0.0, 0.0};
  const auto d = ode_rhs(st, {0.7, 0.2, 0.5, 0.3}, 4);
  CHECK(d.ignorant == Catch::Approx(-0.2));
  CHECK(d.spreader == 0.0);
  CHECK(d.unspreader == 0.0);
  CHECK(d.refuser == 0.0);
  CHECK(d.evildoer == Catch::Approx(0.2));
}

TEST_CASE("derivatives cancel for any state") {
  CounterRng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    double v[5];
    double sum = 0.0;
    for (double& x : v) { x = rng.uniform(); sum += x; }
    for (double& x : v) x /= sum;
    const StateDensities st{v[0], v[1], v[2], v[3], v[4]};
    const PropagationProbabilities pr{rng.uniform(), rng.uniform(), rng.uniform(),
                                      0.05 + 0.95 * rng.uniform()};
    const auto d = ode_rhs(st, pr, 3);
    CHECK(std::abs(d.sum()) < 1e-15);
  }
}

TEST_CASE("spreader growth rate at the seeded start") {
  const auto d = ode_rhs(initial_densities(4000), kCanonical, 3);
  CHECK(d.spreader == Catch::Approx(2.87378125e-4).epsilon(1e-12));
}

TEST_CASE("dead dynamics hold the trajectory constant") {
  const StateDensities start{1.0, 0.0, 0.0, 0.0, 0.0};
  const auto tr = integrate(start, {0.5, 0.0, 0.3, 0.2}, 3, 10.0, 0.1);
  for (const auto& st : tr.states) CHECK(max_abs_diff(st, start) == 0.0);
}

TEST_CASE("normalization holds along the trajectory") {
  const auto tr = integrate(initial_densities(4000), kCanonical, 3, 200.0, 0.01);
  for (const auto& st : tr.states) {
    CHECK(std::abs(st.sum() - 1.0) <= 1e-9);
    for (double v : st.to_array()) CHECK(v >= 0.0);  // clamped output
  }
}

TEST_CASE("halving the step moves the terminal state by less than 1e-3") {
  const PropagationProbabilities pr{0.7, 0.1, 0.3, 0.2};
  const auto a = integrate(initial_densities(4000), pr, 3, 200.0, 0.01);
  const auto b = integrate(initial_densities(4000), pr, 3, 200.0, 0.005);
  CHECK(std::abs(a.terminal().refuser - b.terminal().refuser) < 1e-3);
}

TEST_CASE("step halving contracts the terminal error at fourth order") {
  const PropagationProbabilities pr{0.7, 0.1, 0.3, 0.2};
  const auto s0 = initial_densities(400);
  const auto t1 = integrate(s0, pr, 3, 40.0, 0.4).terminal();
  const auto t2 = integrate(s0, pr, 3, 40.0, 0.2).terminal();
  const auto t3 = integrate(s0, pr, 3, 40.0, 0.1).terminal();
  const double d12 = max_abs_diff(t1, t2);
  const double d23 = max_abs_diff(t2, t3);
  CHECK(d12 / d23 >= 8.0);
}

TEST_CASE("higher forwarding probability reaches more refusers") {
  const auto lo = integrate(initial_densities(4000), {0.3, 0.1, 0.3, 0.2}, 3, 300.0, 0.01);
  const auto hi = integrate(initial_densities(4000), {0.9, 0.1, 0.3, 0.2}, 3, 300.0, 0.01);
  CHECK(hi.terminal().refuser > lo.terminal().refuser);
}

TEST_CASE("spreaders die out over a long horizon") {
  for (double pf : {0.3, 0.9}) {
    const auto tr = integrate(initial_densities(4000), {pf, 0.1, 0.3, 0.2}, 3, 500.0, 0.01);
    CHECK(tr.terminal().spreader <= 1e-6);
  }
}

TEST_CASE("a reckless step is rejected with advice") {
  CHECK_THROWS_WITH(integrate(initial_densities(10), {0.9, 0.5, 0.9, 0.9}, 6, 400.0, 20.0),
                    Catch::Matchers::ContainsSubstring("smaller step"));
}

TEST_CASE("degenerate sigma keeps only the trivial root") {
  CHECK(steady_state({0.0, 0.1, 0.3, 0.2}).r_infinity == 0.0);       // p_f = 0
  CHECK(steady_state({0.5, 1.0, 0.3, 0.2}).r_infinity == 0.0);       // p_e = 1
  CHECK_FALSE(steady_state({0.0, 0.1, 0.3, 0.2}).nontrivial);
}

TEST_CASE("sigma 2.5 reproduces the oracle root") {
  const auto ss = steady_state_from_sigma(2.5);
  CHECK(ss.r_infinity == Catch::Approx(r_inf_fixed_point(2.5)).margin(5e-4));
  CHECK(ss.r_infinity == Catch::Approx(0.8926).margin(5e-4));
}

TEST_CASE("steady-state residual stays below 1e-10") {
  CounterRng rng(99);
  for (int i = 0; i < 200; ++i) {
    const double sigma = 1.0 + 19.0 * rng.uniform();
    const auto ss = steady_state_from_sigma(sigma);
    const double residual = std::abs(ss.r_infinity - (1.0 - std::exp(-sigma * ss.r_infinity)));
    CHECK(residual <= 1e-10);
    CHECK(ss.r_infinity < 1.0);
    CHECK(ss.r_infinity > 0.0);
  }
}

TEST_CASE("consensus level is monotone in each probability") {
  // strictly increasing in p_f
  double prev = -1.0;
  for (int i = 0; i < 20; ++i) {
    const double f = 0.05 + 0.9 * i / 19.0;
    const double r = steady_state({f, 0.1, 0.3, 0.2}).r_infinity;
    CHECK(r > prev);
    prev = r;
  }
  // strictly decreasing in p_i
  prev = 2.0;
  for (int i = 0; i < 20; ++i) {
    const double pi_ = 0.05 + 0.35 * i / 19.0;
    const double r = steady_state({0.5, 0.1, 0.3, pi_}).r_infinity;
    CHECK(r < prev);
    prev = r;
  }
  // strictly decreasing in p_e
  prev = 2.0;
  for (int i = 0; i < 20; ++i) {
    const double pe_ = 0.9 * i / 19.0;
    const double r = steady_state({0.5, pe_, 0.3, 0.1}).r_infinity;
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("no consensus threshold: every level is reachable") {
  for (double target : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    bool reachable = false;
    for (int i = 0; i < 25 && !reachable; ++i)
      for (int j = 0; j < 25 && !reachable; ++j) {
        const double f = 0.02 + 0.96 * i / 24.0;
        const double pi_ = 0.02 + 0.96 * j / 24.0;
        if (steady_state({f, 0.1, 0.3, pi_}).r_infinity > target) reachable = true;
      }
    CHECK(reachable);
  }
}

TEST_CASE("surface rows follow the theorem orderings") {
  PropagationProbabilities base = kCanonical;
  const std::vector<double> fs{0.1, 0.3, 0.5, 0.7, 0.9};
  const std::vector<double> is{0.1, 0.2, 0.3, 0.4};
  const auto surf = consensus_level_surface(base, ProbAxis::Forwarding, fs, ProbAxis::Immunity, is);
  // along increasing p_f (rows), r grows; along increasing p_i (cols), r falls
  for (std::size_t c = 0; c < is.size(); ++c)
    for (std::size_t r = 1; r < fs.size(); ++r)
      CHECK(surf.at(r, c) >= surf.at(r - 1, c));
  for (std::size_t r = 0; r < fs.size(); ++r)
    for (std::size_t c = 1; c < is.size(); ++c)
      CHECK(surf.at(r, c) <= surf.at(r, c - 1));
}

TEST_CASE("surface rows fall as the evil probability grows") {
  const std::vector<double> fs{0.3, 0.6, 0.9};
  const std::vector<double> es{0.0, 0.3, 0.6, 0.9};
  const auto surf = consensus_level_surface(kCanonical, ProbAxis::Forwarding, fs, ProbAxis::Evil, es);
  for (std::size_t r = 0; r < fs.size(); ++r)
    for (std::size_t c = 1; c < es.size(); ++c)
      CHECK(surf.at(r, c) <= surf.at(r, c - 1));
}

TEST_CASE("degenerate 1x1 surface equals the single evaluation") {
  const auto surf =
      consensus_level_surface(kCanonical, ProbAxis::Forwarding, {0.5}, ProbAxis::Immunity, {0.2});
  REQUIRE(surf.r_infinity.size() == 1);
  CHECK(surf.at(0, 0) == steady_state(kCanonical).r_infinity);
}

TEST_CASE("surface rejects identical axes") {
  CHECK_THROWS_AS(
      consensus_level_surface(kCanonical, ProbAxis::Evil, {0.1}, ProbAxis::Evil, {0.2}),
      ValidationError);
}
