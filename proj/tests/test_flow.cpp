#include "doctest.h"

#include <cmath>

#include "sgdlab/builtins.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/flow.hpp"

using namespace sgdlab;

namespace {

double sup_dist_on(const FlowSolution& a, const PathFn& b, double T, int pts = 500) {
  double worst = 0.0;
  for (int k = 0; k <= pts; ++k) {
    const double t = T * static_cast<double>(k) / pts;
    worst = std::max(worst, dist(a.at(t), b(t)));
  }
  return worst;
}

FlowConfig numeric_cfg(double T) {
  FlowConfig cfg;
  cfg.dt = 1e-4;
  cfg.horizon = T;
  cfg.force_numeric = true;
  return cfg;
}

}  // namespace

TEST_CASE("abs flow: unit-slope descent, then equilibrium at 0") {
  const auto sf = make_abs();
  FlowConfig cfg;
  cfg.horizon = 2.0;
  cfg.dt = 1e-3;
  const auto sol = integrate_flow(sf, {1.0}, cfg);
  CHECK(sol.analytic());
  for (double t : {0.0, 0.3, 0.99, 1.0, 1.7, 2.0})
    CHECK(sol.at(t)[0] == doctest::Approx(std::max(1.0 - t, 0.0)).epsilon(1e-12));

  const auto num = integrate_flow(sf, {1.0}, numeric_cfg(2.0));
  CHECK(!num.analytic());
  CHECK(sup_dist_on(num, [](double t) { return Vec{std::max(1.0 - t, 0.0)}; }, 2.0) <= 1e-3);
  CHECK(num.at(2.0)[0] == 0.0);  // exact kink snap, then frozen
}

TEST_CASE("example51 flow: no stalling at 0 in the plain variant") {
  const auto sf = make_example51();
  const auto sol = integrate_flow(sf, {1.0}, numeric_cfg(2.0));
  CHECK(sol.at(2.0)[0] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(sup_dist_on(sol, [](double t) { return Vec{1.0 - t}; }, 2.0) <= 1e-3);
}

TEST_CASE("projected example51 flow freezes at the KKT point -1") {
  const auto sf = make_example51();
  const auto sol = integrate_flow(sf, {1.0}, numeric_cfg(3.0), 1.0);
  CHECK(sup_dist_on(sol, [](double t) { return Vec{std::max(1.0 - t, -1.0)}; }, 3.0) <= 1e-3);
  CHECK(sol.at(3.0)[0] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("numeric matches analytic for the smooth quadratic") {
  const auto sf = make_quadratic();
  const auto num = integrate_flow(sf, {2.0}, numeric_cfg(2.0));
  CHECK(sup_dist_on(num, [](double t) { return Vec{2.0 * std::exp(-t)}; }, 2.0) <= 1e-3);
}

TEST_CASE("F decreases along numeric flows") {
  for (const auto& id : {"abs", "neg-abs", "quadratic", "example51"}) {
    const auto sf = make_builtin(id);
    const auto sol = integrate_flow(sf, {0.8}, numeric_cfg(1.5));
    double prev = mean_F(sf, sol.points().front());
    for (const auto& p : sol.points()) {
      const double v = mean_F(sf, p);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("flow equilibria coincide with the critical set") {
  const auto abs_sf = make_abs();
  const auto sol = integrate_flow(abs_sf, {0.4}, numeric_cfg(1.0));
  CHECK(distance_to_critical(abs_sf, sol.at(1.0)) == 0.0);
  // neg-abs from its critical point: the min-norm solution stays put
  const auto na = make_neg_abs();
  const auto stall = integrate_flow(na, {0.0}, numeric_cfg(1.0));
  CHECK(stall.at(1.0)[0] == 0.0);
}

TEST_CASE("dC distance: degenerate, saturated, and the hand-derived stall value") {
  const PathFn zero = [](double) { return Vec{0.0}; };
  const PathFn five = [](double) { return Vec{5.0}; };
  CHECK(dC_distance(zero, zero, 4.0).value == 0.0);

  const auto sat = dC_distance(zero, five, 20.0);
  CHECK(sat.value == doctest::Approx(1.0 - std::pow(2.0, -20)).epsilon(1e-12));
  CHECK(sat.tail_bound == doctest::Approx(std::pow(2.0, -20)));

  // plain example51 path 1 - t against the stalled path max(1 - t, 0):
  // sup over [0,1] is 0, over [0,2] is 1, over [0,3] is 2 (clipped to 1)
  const PathFn plain = [](double t) { return Vec{1.0 - t}; };
  const PathFn stalled = [](double t) { return Vec{std::max(1.0 - t, 0.0)}; };
  const auto d = dC_distance(plain, stalled, 3.0);
  CHECK(d.value == doctest::Approx(0.375).epsilon(1e-9));
  CHECK(d.tail_bound == doctest::Approx(0.125));
}

TEST_CASE("dC is a metric on sampled paths") {
  const PathFn a = [](double t) { return Vec{std::sin(t)}; };
  const PathFn b = [](double t) { return Vec{0.3 * t}; };
  const PathFn c = [](double t) { return Vec{std::cos(t) - 1.0}; };
  const double dab = dC_distance(a, b, 5.0).value;
  const double dba = dC_distance(b, a, 5.0).value;
  const double dac = dC_distance(a, c, 5.0).value;
  const double dcb = dC_distance(c, b, 5.0).value;
  CHECK(std::fabs(dab - dba) <= 1e-12);
  CHECK(dab <= dac + dcb + 1e-12);
  CHECK_THROWS_AS(dC_distance(a, b, 1.0, 5), ConfigError);
  CHECK_THROWS_AS(dC_distance(a, b, -1.0), ConfigError);
}

TEST_CASE("linear growth certificates") {
  std::vector<Vec> grid;
  for (int i = -20; i <= 20; ++i) grid.push_back({0.5 * i});
  const auto abs_rep = check_linear_growth(make_abs(), grid, 1.0);
  CHECK(abs_rep.passes);
  CHECK(abs_rep.worst_ratio <= 1.0);
  const auto quad_rep = check_linear_growth(make_quadratic(), grid, 1.0);
  CHECK(quad_rep.passes);
  CHECK(quad_rep.worst_ratio < 1.0);
  CHECK(!check_linear_growth(make_quadratic(), grid, 0.5).passes);
}

TEST_CASE("flow configuration errors") {
  const auto sf = make_abs();
  FlowConfig bad;
  bad.dt = 0.0;
  bad.horizon = 1.0;
  CHECK_THROWS_AS(integrate_flow(sf, {1.0}, bad), ConfigError);
  CHECK_THROWS_AS(integrate_flow(sf, {1.0, 2.0}, numeric_cfg(1.0)), ConfigError);
  CHECK_THROWS_AS(integrate_flow(sf, {1.0}, numeric_cfg(1.0), -2.0), ConfigError);
  const auto sol = integrate_flow(sf, {1.0}, numeric_cfg(1.0));
  CHECK_THROWS_AS(sol.at(5.0), ConfigError);
}
