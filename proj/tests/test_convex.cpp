#include "doctest.h"

#include <cmath>

#include "sgdlab/convex.hpp"
#include "sgdlab/rng.hpp"

using namespace sgdlab;

TEST_CASE("min-norm element of 1D intervals is the clamp of 0") {
  CHECK(ConvexGeneratorSet::interval(-1.0, 1.0).min_norm_element()[0] == 0.0);
  CHECK(ConvexGeneratorSet::interval(0.5, 2.0).min_norm_element()[0] == 0.5);
  CHECK(ConvexGeneratorSet::interval(-3.0, -0.25).min_norm_element()[0] == -0.25);
  CHECK(ConvexGeneratorSet::singleton({4.0}).min_norm_element()[0] == 4.0);
}

TEST_CASE("min-norm element of the 2D segment (1,0)-(0,1)") {
  // oracle: min over t of ||(1-t, t)||^2 = 2t^2 - 2t + 1 is at t = 1/2
  ConvexGeneratorSet s({{1.0, 0.0}, {0.0, 1.0}}, 2);
  const Vec m = s.min_norm_element();
  CHECK(std::fabs(m[0] - 0.5) < 1e-10);
  CHECK(std::fabs(m[1] - 0.5) < 1e-10);
}

TEST_CASE("min-norm on random 2D triangles matches a dense simplex grid") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> gens;
    for (int i = 0; i < 3; ++i) gens.push_back(rng.gaussian_vec(2, 0.5, 2.0));
    ConvexGeneratorSet s(gens, 2);
    const double got = norm(s.min_norm_element());
    // oracle: brute-force over barycentric coordinates
    double best = 1e300;
    const int n = 200;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n - i; ++j) {
        const double a = double(i) / n, b = double(j) / n, c = 1.0 - a - b;
        Vec p = {a * gens[0][0] + b * gens[1][0] + c * gens[2][0],
                 a * gens[0][1] + b * gens[1][1] + c * gens[2][1]};
        best = std::min(best, norm(p));
      }
    // the grid overshoots the true min by at most its spacing (norm is 1-Lipschitz)
    const double spacing = (dist(gens[0], gens[2]) + dist(gens[1], gens[2])) / n;
    CHECK(got <= best + 1e-10);
    CHECK(got >= best - spacing);
  }
}

TEST_CASE("min-norm norm bounded by every generator and idempotent under insertion") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec> gens;
    for (int i = 0; i < 4; ++i) gens.push_back(rng.gaussian_vec(3));
    ConvexGeneratorSet s(gens, 3);
    const Vec m = s.min_norm_element();
    for (const auto& g : gens) CHECK(norm(m) <= norm(g) + 1e-12);
    auto gens2 = gens;
    gens2.push_back(m);
    const Vec m2 = ConvexGeneratorSet(gens2, 3).min_norm_element();
    CHECK(dist(m, m2) < 1e-8);
  }
}

TEST_CASE("distance, membership and support") {
  ConvexGeneratorSet s = ConvexGeneratorSet::interval(-1.0, 2.0);
  CHECK(s.distance({0.5}) == doctest::Approx(0.0));
  CHECK(s.distance({3.0}) == doctest::Approx(1.0));
  CHECK(s.distance({-4.0}) == doctest::Approx(3.0));
  CHECK(s.contains({2.0}));
  CHECK(!s.contains({2.1}));
  CHECK(s.support({1.0}) == doctest::Approx(2.0));
  CHECK(s.support({-1.0}) == doctest::Approx(1.0));
  CHECK(s.lo() == -1.0);
  CHECK(s.hi() == 2.0);
  CHECK(s.max_generator_norm() == doctest::Approx(2.0));
}

TEST_CASE("Hausdorff distance between polytopes") {
  const auto a = ConvexGeneratorSet::singleton({1.0});
  const auto b = ConvexGeneratorSet::interval(0.0, 1.0);
  CHECK(ConvexGeneratorSet::hausdorff(a, b) == doctest::Approx(1.0));
  CHECK(ConvexGeneratorSet::hausdorff(b, b) == doctest::Approx(0.0));
  const auto c = ConvexGeneratorSet::interval(-1.0, 1.0);
  CHECK(ConvexGeneratorSet::hausdorff(b, c) == doctest::Approx(1.0));

  ConvexGeneratorSet sq({{0, 0}, {1, 0}, {0, 1}, {1, 1}}, 2);
  ConvexGeneratorSet tri({{0, 0}, {1, 0}, {0, 1}}, 2);
  CHECK(ConvexGeneratorSet::hausdorff(sq, tri) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("degenerate and redundant generator lists") {
  // duplicated generators and interior points must not change the answers
  ConvexGeneratorSet s({{2.0}, {2.0}, {3.0}, {2.5}}, 1);
  CHECK(s.min_norm_element()[0] == 2.0);
  CHECK(s.lo() == 2.0);
  CHECK(s.hi() == 3.0);
}
