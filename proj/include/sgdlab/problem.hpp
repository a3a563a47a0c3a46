#ifndef SGDLAB_PROBLEM_HPP_
#define SGDLAB_PROBLEM_HPP_

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgdlab/convex.hpp"
#include "sgdlab/graph.hpp"
#include "sgdlab/linalg.hpp"
#include "sgdlab/rng.hpp"

namespace sgdlab {

/// Sample space (Xi, mu): either finitely many atoms with weights, or a
/// continuous space with a named deterministic sampler.
struct SampleSpace {
  enum class Kind { Finite, Continuous };
  Kind kind = Kind::Finite;
  std::vector<double> weights;  // finite atoms; nonnegative, sum 1 within 1e-12
  std::string sampler_id;       // continuous
  int sample_dim = 0;           // continuous draw dimension
  std::string description;

  bool finite() const { return kind == Kind::Finite; }
  int num_atoms() const { return static_cast<int>(weights.size()); }
  void validate() const;
};

/// One draw from the sample space: an atom index for finite spaces, a vector
/// for continuous ones.
struct Sample {
  int atom = -1;
  Vec value;

  static Sample of_atom(int a) { return Sample{a, {}}; }
  static Sample of_value(Vec v) { return Sample{-1, std::move(v)}; }
};

/// A maximal open interval on which a 1D per-sample function is smooth.
struct SmoothCell {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::function<double(double)> value;
  std::function<double(double)> deriv;
};

/// A point of nondifferentiability (or of Clarke irregularity) in 1D.
/// `differentiable` covers the oscillatory case where the gradient exists but
/// the Clarke set is a strictly larger interval.
struct Breakpoint1D {
  double x = 0.0;
  double value = 0.0;
  std::vector<double> clarke_gens;  // hull of limits of nearby derivatives
  bool differentiable = false;
  double grad = 0.0;  // meaningful when differentiable
};

/// A 1D piecewise-smooth function: ordered cells separated by breakpoints.
/// Kink membership is exact predicate evaluation (x == breakpoint), with ties
/// classified as kink.
struct Piecewise1D {
  std::vector<SmoothCell> cells;
  std::vector<Breakpoint1D> breakpoints;  // sorted by x

  double value(double x) const;
  std::optional<double> deriv(double x) const;  // absent at nondifferentiable breakpoints
  bool at_kink(double x) const;
  int kink_id(double x) const;  // index into breakpoints, -1 if none
  ConvexGeneratorSet clarke(double x) const;
  void validate() const;
};

/// Union of finitely many points and axis-aligned boxes; supports exact
/// Euclidean distance. Empty set has distance +inf (documented sentinel,
/// needed because some builtins have no critical point).
struct CriticalSet {
  struct Box {
    Vec lo, hi;  // degenerate boxes are points
  };
  std::vector<Box> elements;

  static CriticalSet empty_set() { return CriticalSet{}; }
  static CriticalSet point(Vec p) { return CriticalSet{{Box{p, p}}}; }
  bool empty() const { return elements.empty(); }
  double distance(const Vec& x) const;
};

/// A stochastic piecewise-smooth function f(x, s) with exact per-sample
/// gradients/Clarke sets and optional exact oracles for the mean function F.
/// Immutable after construction; all member functions are pure.
struct StochasticFunction {
  std::string name;
  std::string config_text;  // canonical JSON {problem, params}; round-trips via make_builtin
  int dim = 1;
  SampleSpace space;

  // per-sample interface
  std::function<double(const Vec&, const Sample&)> eval;
  std::function<bool(const Vec&, const Sample&)> is_kink;
  std::function<std::optional<Vec>(const Vec&, const Sample&)> gradient;
  std::function<ConvexGeneratorSet(const Vec&, const Sample&)> clarke;
  std::function<std::vector<int>(const Vec&, const Sample&)> kink_ids;

  // exact oracles for the mean function (absent entries throw on use)
  std::function<double(const Vec&)> mean;
  std::function<std::optional<Vec>(const Vec&)> mean_grad;
  std::function<ConvexGeneratorSet(const Vec&)> mean_clarke;
  std::optional<CriticalSet> critical_set;                        // Z
  std::function<CriticalSet(double)> kkt_set;                     // Z_r(r)
  std::function<double(double)> lipschitz_bound;                  // kappa-bar on B(0, radius)

  // continuous-space sampler (deterministic given the rng state)
  std::function<Vec(Rng&)> sampler;
  double noise_second_moment = 0.0;  // E||s||^2 for continuous noise spaces

  // structural extras
  std::vector<Piecewise1D> per_atom_1d;  // 1D finite builtins
  std::vector<CompGraph> graphs;         // per-atom computation graphs, if any
  std::vector<double> mean_kinks;        // 1D kink locations of F
  std::vector<double> excluded_steps;    // admissible-step registry (steps not in Gamma)
  bool coercive = false;                 // drift validity for plain long-run experiments
  bool flow_unique = false;              // subgradient flow unique from every point

  // analytic flow closed forms (optional)
  std::function<Vec(const Vec&, double)> analytic_flow;                  // plain
  std::function<Vec(const Vec&, double, double)> analytic_flow_proj;     // projected(r)

  Sample draw(Rng& rng) const;
  bool step_admissible(double gamma) const;
  const CompGraph& graph_for(const Sample& s) const;
  bool has_graphs() const { return !graphs.empty(); }
};

// ---- operations --------------------------------------------------------

double eval_f(const StochasticFunction& sf, const Vec& x, const Sample& s);
std::optional<Vec> grad_f(const StochasticFunction& sf, const Vec& x, const Sample& s);
ConvexGeneratorSet clarke_f(const StochasticFunction& sf, const Vec& x, const Sample& s);

double mean_F(const StochasticFunction& sf, const Vec& x);
std::optional<Vec> grad_F(const StochasticFunction& sf, const Vec& x);
ConvexGeneratorSet clarke_F(const StochasticFunction& sf, const Vec& x);

/// Weighted Minkowski average of the per-atom Clarke sets (finite spaces).
ConvexGeneratorSet mean_clarke_f(const StochasticFunction& sf, const Vec& x);

enum class CriticalVariant { Z, Zr };

/// Exact distance to the critical set Z, or to the KKT set Z_r of the ball
/// of radius r. Returns +inf when the set is empty.
double distance_to_critical(const StochasticFunction& sf, const Vec& x,
                            CriticalVariant variant = CriticalVariant::Z, double r = 0.0);

// 1D conveniences used throughout the tests
inline double eval_f(const StochasticFunction& sf, double x, int atom) {
  return eval_f(sf, Vec{x}, Sample::of_atom(atom));
}

/// Steps excluded from Gamma for a quadratic mean function with the given
/// Hessian eigenvalues: gamma = 1/lambda collapses a direction to a point.
std::vector<double> quadratic_excluded_steps(const std::vector<double>& hessian_eigenvalues);

}  // namespace sgdlab

#endif  // SGDLAB_PROBLEM_HPP_
