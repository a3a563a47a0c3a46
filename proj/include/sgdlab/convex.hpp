#ifndef SGDLAB_CONVEX_HPP_
#define SGDLAB_CONVEX_HPP_

#include <vector>

#include "sgdlab/linalg.hpp"

namespace sgdlab {

/// A convex compact set given as the convex hull of finitely many generators.
/// All Clarke subdifferentials in this project are finitely generated
/// polytopes; in 1D the hull is the interval [min, max] of the generators.
class ConvexGeneratorSet {
 public:
  ConvexGeneratorSet(std::vector<Vec> generators, int dim);

  static ConvexGeneratorSet singleton(Vec v);
  static ConvexGeneratorSet interval(double lo, double hi);

  const std::vector<Vec>& generators() const { return gens_; }
  int dim() const { return dim_; }

  /// Minimum-Euclidean-norm point of the hull. Exact clamp in 1D; pairwise
  /// Frank-Wolfe on the generator polytope otherwise.
  Vec min_norm_element() const;

  /// Euclidean distance from p to the hull.
  double distance(const Vec& p) const;

  bool contains(const Vec& p, double tol = 1e-9) const { return distance(p) <= tol; }

  /// Support function max_{g in hull} <g, dir>.
  double support(const Vec& dir) const;

  double max_generator_norm() const;

  /// 1D hull endpoints.
  double lo() const;
  double hi() const;

  /// Hausdorff distance between two hulls (exact for polytopes: the distance
  /// to a convex set is maximized at extreme points).
  static double hausdorff(const ConvexGeneratorSet& a, const ConvexGeneratorSet& b);

 private:
  std::vector<Vec> gens_;
  int dim_;
};

}  // namespace sgdlab

#endif  // SGDLAB_CONVEX_HPP_
