#include "sgdlab/convex.hpp"

#include <algorithm>
#include <limits>

#include "sgdlab/errors.hpp"

namespace sgdlab {

ConvexGeneratorSet::ConvexGeneratorSet(std::vector<Vec> generators, int dim)
    : gens_(std::move(generators)), dim_(dim) {
  if (gens_.empty()) throw ProblemError("ConvexGeneratorSet: empty generator list");
  for (const auto& g : gens_)
    if (static_cast<int>(g.size()) != dim_)
      throw ProblemError("ConvexGeneratorSet: generator dimension mismatch");
}

ConvexGeneratorSet ConvexGeneratorSet::singleton(Vec v) {
  const int d = static_cast<int>(v.size());
  return ConvexGeneratorSet({std::move(v)}, d);
}

ConvexGeneratorSet ConvexGeneratorSet::interval(double lo, double hi) {
  return ConvexGeneratorSet({{lo}, {hi}}, 1);
}

double ConvexGeneratorSet::lo() const {
  if (dim_ != 1) throw ProblemError("lo(): 1D only");
  double m = gens_[0][0];
  for (const auto& g : gens_) m = std::min(m, g[0]);
  return m;
}

double ConvexGeneratorSet::hi() const {
  if (dim_ != 1) throw ProblemError("hi(): 1D only");
  double m = gens_[0][0];
  for (const auto& g : gens_) m = std::max(m, g[0]);
  return m;
}

double ConvexGeneratorSet::support(const Vec& dir) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& g : gens_) m = std::max(m, dot(g, dir));
  return m;
}

double ConvexGeneratorSet::max_generator_norm() const {
  double m = 0.0;
  for (const auto& g : gens_) m = std::max(m, norm(g));
  return m;
}

namespace {

// Pairwise Frank-Wolfe for min_{x in conv(gens)} ||x||^2. Linear convergence
// on polytopes; the generator lists here are tiny (<= a few dozen points).
Vec min_norm_fw(const std::vector<Vec>& gens) {
  const std::size_t m = gens.size();
  // start from the generator with smallest norm
  std::size_t best = 0;
  double best_n = sq_norm(gens[0]);
  for (std::size_t i = 1; i < m; ++i) {
    const double n = sq_norm(gens[i]);
    if (n < best_n) {
      best_n = n;
      best = i;
    }
  }
  std::vector<double> lambda(m, 0.0);
  lambda[best] = 1.0;
  Vec x = gens[best];

  const int max_iter = 20000;
  for (int it = 0; it < max_iter; ++it) {
    // FW vertex: minimizes <x, g>
    std::size_t s = 0;
    double sval = dot(x, gens[0]);
    for (std::size_t i = 1; i < m; ++i) {
      const double v = dot(x, gens[i]);
      if (v < sval) {
        sval = v;
        s = i;
      }
    }
    const double gap = dot(x, x) - sval;  // <x, x - g_s>
    if (gap <= 1e-14 * std::max(1.0, dot(x, x))) break;

    // away vertex: maximizes <x, g> over the active set
    std::size_t a = s;
    double aval = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (lambda[i] <= 0.0) continue;
      const double v = dot(x, gens[i]);
      if (v > aval) {
        aval = v;
        a = i;
      }
    }
    Vec d = sub(gens[s], gens[a]);
    const double dd = sq_norm(d);
    if (dd == 0.0) break;
    double t = -dot(x, d) / dd;
    t = std::clamp(t, 0.0, lambda[a]);
    if (t == 0.0) break;
    axpy(t, d, x);
    lambda[s] += t;
    lambda[a] -= t;
  }
  return x;
}

}  // namespace

Vec ConvexGeneratorSet::min_norm_element() const {
  if (gens_.size() == 1) return gens_[0];
  if (dim_ == 1) {
    // clamp 0 into [lo, hi]
    const double l = lo(), h = hi();
    return {std::clamp(0.0, l, h)};
  }
  return min_norm_fw(gens_);
}

double ConvexGeneratorSet::distance(const Vec& p) const {
  if (static_cast<int>(p.size()) != dim_)
    throw ProblemError("distance(): point dimension mismatch");
  if (dim_ == 1) {
    const double l = lo(), h = hi();
    if (p[0] < l) return l - p[0];
    if (p[0] > h) return p[0] - h;
    return 0.0;
  }
  std::vector<Vec> shifted;
  shifted.reserve(gens_.size());
  for (const auto& g : gens_) shifted.push_back(sub(g, p));
  return norm(min_norm_fw(shifted));
}

double ConvexGeneratorSet::hausdorff(const ConvexGeneratorSet& a, const ConvexGeneratorSet& b) {
  double h = 0.0;
  for (const auto& g : a.generators()) h = std::max(h, b.distance(g));
  for (const auto& g : b.generators()) h = std::max(h, a.distance(g));
  return h;
}

}  // namespace sgdlab
