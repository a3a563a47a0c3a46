#include "doctest.h"

#include <cmath>
#include <limits>

#include "sgdlab/builtins.hpp"
#include "sgdlab/diagnostics.hpp"
#include "sgdlab/errors.hpp"

using namespace sgdlab;

namespace {

const InitLaw kUnit = InitLaw::uniform1(-1.0, 1.0);

}  // namespace

TEST_CASE("apt probability: sentinel, deterministic case, and refusals") {
  const auto quad = make_quadratic();
  // infinite tolerance: the exceedance probability is identically 0
  const auto inf_rep = apt_probability(quad, {0.1, 0.01},
                                       std::numeric_limits<double>::infinity(), 1.0, 20, kUnit, 4);
  for (const auto& row : inf_rep.rows) CHECK(row.estimate == 0.0);

  // deterministic problem: the dC gap is O(gamma), far below eps = 0.1
  const auto det = apt_probability(quad, {0.01}, 0.1, 1.0, 10, kUnit, 4);
  CHECK(det.rows[0].estimate == 0.0);

  CHECK_THROWS_AS(apt_probability(quad, {0.01}, 0.1, 1.0, 10, InitLaw::dirac({1.0}), 4),
                  ConfigError);
  CHECK_THROWS_AS(apt_probability(make_neg_abs(), {0.01}, 0.1, 1.0, 10, kUnit, 4), ProblemError);
  CHECK_THROWS_AS(apt_probability(quad, {1.0}, 0.1, 1.0, 10, kUnit, 4), ConfigError);
}

TEST_CASE("apt probability decreases with the step size on abs") {
  const auto rep = apt_probability(make_abs(), {0.1, 0.001}, 0.2, 2.0, 100, kUnit, 4, 4);
  CHECK(rep.rows[0].param == 0.1);
  CHECK(rep.rows[1].estimate <=
        rep.rows[0].estimate + 2.0 * (rep.rows[0].half_width + rep.rows[1].half_width));
  CHECK(rep.rows[1].estimate <= 0.05);
  for (const auto& row : rep.rows) {
    CHECK(row.estimate >= 0.0);
    CHECK(row.estimate <= 1.0);
    CHECK(row.half_width == doctest::Approx(wilson_half_width(row.estimate, row.n)));
  }
}

TEST_CASE("long-run criticality on abs concentrates near 0") {
  const auto rep = longrun_criticality(make_abs(), {0.2, 0.01}, 0.1, 5000, 5000, 20, kUnit,
                                       RunVariant::plain(), 4, 4);
  CHECK(rep.rows[0].estimate > rep.rows[1].estimate);
  CHECK(rep.rows[1].estimate <= 0.01);
}

TEST_CASE("long-run refusals: empty Z, non-coercive, Dirac init") {
  CHECK_THROWS_AS(longrun_criticality(make_example51(), {0.01}, 0.1, 10, 10, 2, kUnit,
                                      RunVariant::plain(), 0),
                  ProblemError);
  CHECK_THROWS_AS(longrun_criticality(make_neg_abs(), {0.01}, 0.1, 10, 10, 2, kUnit,
                                      RunVariant::plain(), 0),
                  ProblemError);
  CHECK_THROWS_AS(longrun_criticality(make_abs(), {0.01}, 0.1, 10, 10, 2, InitLaw::dirac({0.5}),
                                      RunVariant::plain(), 0),
                  ConfigError);
}

TEST_CASE("projected long-run on example51 sits at the KKT point") {
  const auto rep = longrun_criticality(make_example51(), {0.01}, 0.05, 2000, 2000, 20, kUnit,
                                       RunVariant::projected(1.0), 4, 4);
  CHECK(rep.rows[0].estimate <= 0.01);
}

TEST_CASE("exceedance estimates are monotone in eps on shared seeds") {
  const auto sf = make_abs();
  const auto tight = longrun_criticality(sf, {0.05}, 0.01, 2000, 2000, 10, kUnit,
                                         RunVariant::plain(), 9, 4);
  const auto loose = longrun_criticality(sf, {0.05}, 0.2, 2000, 2000, 10, kUnit,
                                         RunVariant::plain(), 9, 4);
  CHECK(tight.rows[0].estimate >= loose.rows[0].estimate);
}

TEST_CASE("drift inequality holds with the certified constant") {
  const auto nq = make_noisy_quadratic();
  const double k = certified_drift_k(nq);
  CHECK(k == doctest::Approx(0.5 + 0.5 / 3.0));
  std::vector<Vec> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back({static_cast<double>(i)});
  for (double gamma : {0.2, 0.1, 0.05, 0.01}) {
    const auto rep = drift_check(nq, gamma, grid, 1.0, k, 40000, 17);
    CHECK(rep.passes);
  }
  CHECK_THROWS_AS(certified_drift_k(make_quadratic()), ProblemError);
}

TEST_CASE("drift check on the noiseless quadratic is exact") {
  const auto quad = make_quadratic();
  std::vector<Vec> grid;
  for (int i = -10; i <= 10; ++i) grid.push_back({static_cast<double>(i)});
  for (double gamma : {0.5, 0.1, 0.01}) {
    const auto rep = drift_check(quad, gamma, grid, 1.0, 1.0, 1, 0);
    CHECK(rep.passes);
    for (const auto& row : rep.rows) CHECK(row.half_width == 0.0);  // exact finite sum
  }
}

TEST_CASE("drift bound stays within noise even for tiny gamma") {
  const auto nq = make_noisy_quadratic();
  const double k = certified_drift_k(nq);
  std::vector<Vec> grid = {{3.0}, {5.0}, {8.0}};
  // as gamma -> 0 both sides collapse to F(x); the margin must stay at MC-noise scale
  const auto small = drift_check(nq, 1e-4, grid, 1.0, k, 40000, 5);
  CHECK(small.passes);
  CHECK(small.worst_margin_in_half_widths <= 3.0);
}

TEST_CASE("selection equality: zero deviation with shared streams") {
  const std::vector<SelectionPolicy> policies = {
      SelectionPolicy::parse("lazy"), SelectionPolicy::parse("clarke-min-norm"),
      SelectionPolicy::parse("clarke-extreme:right"), SelectionPolicy::parse("norkin")};
  const auto rep = selection_equality(make_abs(), policies, 0.01, 2000, 5, kUnit, 11, 4);
  CHECK(rep.max_deviation == 0.0);
  CHECK(rep.total_kink_hits == 0);

  // smooth problem at the excluded step with a Dirac override: still equal
  const auto rep2 = selection_equality(make_quadratic(), policies, 1.0, 100, 2,
                                       InitLaw::dirac({3.0}), 0, 1, true);
  CHECK(rep2.max_deviation == 0.0);

  CHECK_THROWS_AS(selection_equality(make_quadratic(), policies, 1.0, 100, 2, kUnit, 0),
                  ConfigError);
  CHECK_THROWS_AS(selection_equality(make_abs(), {policies[0]}, 0.01, 100, 2, kUnit, 0),
                  ConfigError);
}

TEST_CASE("stationary histogram on abs: confinement band around 0") {
  const auto hist = stationary_histogram(make_abs(), 0.01, RunVariant::plain(), 20000, 20000, 40,
                                         0.05, kUnit, 23);
  CHECK(hist.mass_near_critical >= 0.99);
  CHECK(hist.total == 20000);
  long count_sum = 0;
  for (long c : hist.counts) count_sum += c;
  CHECK(count_sum == hist.total);
  CHECK(std::fabs(hist.mean) < 0.05);
}

TEST_CASE("stationary histogram of the perturbed quadratic matches the AR(1) law") {
  const double gamma = 0.1;
  const auto hist = stationary_histogram(make_quadratic(), gamma, RunVariant::perturbed(1.0),
                                         5000, 200000, 40, 0.5, kUnit, 31);
  const double exact_var = gamma * gamma / (1.0 - (1.0 - gamma) * (1.0 - gamma));
  CHECK(std::fabs(hist.mean) <= 3.0 * std::sqrt(exact_var / 2000.0) + 0.01);
  CHECK(std::fabs(hist.variance - exact_var) <= 0.2 * exact_var);
}

TEST_CASE("strict inclusion report across problems") {
  const auto e51 = strict_inclusion_report(make_example51(), {0.0});
  CHECK(e51.clarke_mean.generators() == std::vector<Vec>{{1.0}});
  CHECK(e51.mean_clarke.lo() == 0.0);
  CHECK(e51.mean_clarke.hi() == 2.0);
  CHECK(e51.zero_in_mean_clarke);
  CHECK(!e51.zero_in_clarke_mean);
  CHECK(e51.hausdorff == doctest::Approx(1.0));

  const auto ab = strict_inclusion_report(make_abs(), {0.0});
  CHECK(ab.hausdorff == doctest::Approx(0.0));
  CHECK(ab.zero_in_clarke_mean);
  CHECK(ab.zero_in_mean_clarke);

  const auto q = strict_inclusion_report(make_quadratic(), {0.7});
  CHECK(q.clarke_mean.generators() == std::vector<Vec>{{0.7}});
  CHECK(q.mean_clarke.generators() == std::vector<Vec>{{0.7}});
}

TEST_CASE("parallel execution gives the same report as serial") {
  const auto serial = apt_probability(make_abs(), {0.05}, 0.2, 1.0, 40, kUnit, 8, 1);
  const auto parallel = apt_probability(make_abs(), {0.05}, 0.2, 1.0, 40, kUnit, 8, 4);
  CHECK(serial.rows[0].estimate == parallel.rows[0].estimate);
  CHECK(serial.rows[0].n == parallel.rows[0].n);
}
