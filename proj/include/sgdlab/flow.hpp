#ifndef SGDLAB_FLOW_HPP_
#define SGDLAB_FLOW_HPP_

#include <functional>
#include <optional>

#include "sgdlab/problem.hpp"

namespace sgdlab {

struct FlowConfig {
  double dt = 1e-4;
  double horizon = 1.0;
  double event_tol = 1e-10;  // kink band in dimension > 1; 1D membership is exact
  bool force_numeric = false;

  void validate() const;
};

/// A numeric (or closed-form sampled) solution of the subgradient-flow
/// differential inclusion, evaluable at arbitrary t by linear interpolation.
class FlowSolution {
 public:
  FlowSolution(std::vector<double> times, std::vector<Vec> points, bool analytic);

  bool analytic() const { return analytic_; }
  double horizon() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& points() const { return points_; }

  Vec at(double t) const;

  void write_csv(std::ostream& os) const;

 private:
  std::vector<double> times_;
  std::vector<Vec> points_;
  bool analytic_;
};

/// Integrates dx/dt in -dF(x) (optionally -dF(x) - N_r(x)) with the min-norm
/// selection: explicit Euler with exact 1D kink snapping, radial projection
/// for the ball-constrained variant. Builtins with closed forms return them
/// directly unless force_numeric is set.
FlowSolution integrate_flow(const StochasticFunction& sf, const Vec& x0, const FlowConfig& cfg,
                            std::optional<double> projection_radius = std::nullopt);

using PathFn = std::function<Vec(double)>;

struct DcResult {
  double value = 0.0;
  double tail_bound = 0.0;  // 2^-ceil(T) for the truncated terms
};

/// Truncated compact-convergence metric:
/// sum_{n=1..ceil(T)} 2^-n (1 ^ sup_{[0, min(n,T)]} ||a - b||), evaluated on a
/// uniform grid with at least `pts_per_unit` points per unit time.
DcResult dC_distance(const PathFn& a, const PathFn& b, double horizon, int pts_per_unit = 200);

inline PathFn as_path(const FlowSolution& sol) {
  return [&sol](double t) { return sol.at(t); };
}

struct LinearGrowthReport {
  double worst_ratio = 0.0;  // max over the grid of sup||dF(x)|| / (1 + ||x||)
  double k_candidate = 0.0;
  bool passes = false;
};

/// Checks sup{||v|| : v in dF(x)} <= K (1 + ||x||) over a grid of points.
LinearGrowthReport check_linear_growth(const StochasticFunction& sf, const std::vector<Vec>& grid,
                                       double k_candidate);

}  // namespace sgdlab

#endif  // SGDLAB_FLOW_HPP_
