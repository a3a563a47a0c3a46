#include "sgdlab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sgdlab/errors.hpp"
#include "sgdlab/sgd.hpp"

namespace sgdlab {

void FlowConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("flow dt must be positive");
  if (!(horizon > 0.0)) throw ConfigError("flow horizon must be positive");
}

FlowSolution::FlowSolution(std::vector<double> times, std::vector<Vec> points, bool analytic)
    : times_(std::move(times)), points_(std::move(points)), analytic_(analytic) {
  if (times_.size() != points_.size() || times_.size() < 2)
    throw ConfigError("flow solution grid mismatch");
}

Vec FlowSolution::at(double t) const {
  if (t < 0.0 || t > times_.back() * (1.0 + 1e-12))
    throw ConfigError("flow evaluation time outside the solution domain");
  t = std::min(t, times_.back());
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t hi = std::min<std::size_t>(it - times_.begin(), times_.size() - 1);
  const std::size_t lo = hi - 1;
  const double span = times_[hi] - times_[lo];
  const double frac = span > 0.0 ? (t - times_[lo]) / span : 0.0;
  Vec out(points_[lo].size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = points_[lo][i] + frac * (points_[hi][i] - points_[lo][i]);
  return out;
}

void FlowSolution::write_csv(std::ostream& os) const {
  os << "t";
  for (std::size_t i = 0; i < points_[0].size(); ++i) os << ",x" << i;
  os << "\n";
  for (std::size_t k = 0; k < times_.size(); ++k) {
    os << times_[k];
    for (double v : points_[k]) os << "," << v;
    os << "\n";
  }
}

namespace {

// 1D: exact kink snapping keeps F(x(t)) monotone and lands equilibria exactly.
bool crosses(double from, double to, double kink) {
  return (from < kink && to > kink) || (from > kink && to < kink) || to == kink;
}

FlowSolution integrate_numeric(const StochasticFunction& sf, const Vec& x0, const FlowConfig& cfg,
                               std::optional<double> r) {
  const long n_steps = static_cast<long>(std::ceil(cfg.horizon / cfg.dt));
  std::vector<double> times;
  std::vector<Vec> points;
  times.reserve(n_steps + 1);
  points.reserve(n_steps + 1);

  if (sf.dim == 1 && !sf.mean_kinks.empty() && cfg.dt >= 1e-2)
    std::fprintf(stderr, "[flow] warning: dt=%g may straddle kink-crossing scales\n", cfg.dt);

  Vec x = r ? project_ball(x0, *r) : x0;
  bool frozen = false;
  times.push_back(0.0);
  points.push_back(x);
  for (long k = 1; k <= n_steps; ++k) {
    if (!frozen) {
      const auto dF = clarke_F(sf, x);
      Vec v = dF.min_norm_element();
      if (!r && norm(v) == 0.0) {
        frozen = true;
      } else {
        Vec y = x;
        axpy(-cfg.dt, v, y);
        if (sf.dim == 1 && !r) {
          for (double kink : sf.mean_kinks) {
            if (crosses(x[0], y[0], kink)) {
              const auto at_kink = clarke_F(sf, Vec{kink});
              if (norm(at_kink.min_norm_element()) == 0.0) {
                y = {kink};
                frozen = true;
              }
              break;
            }
          }
        }
        if (r) {
          y = project_ball(y, *r);
          if (dist(y, x) <= cfg.event_tol * cfg.dt) frozen = true;  // KKT stall at the boundary
        }
        x = y;
      }
    }
    times.push_back(std::min(k * cfg.dt, cfg.horizon));
    points.push_back(x);
  }
  return FlowSolution(std::move(times), std::move(points), false);
}

}  // namespace

FlowSolution integrate_flow(const StochasticFunction& sf, const Vec& x0, const FlowConfig& cfg,
                            std::optional<double> projection_radius) {
  cfg.validate();
  if (static_cast<int>(x0.size()) != sf.dim) throw ConfigError("flow x0 dimension mismatch");
  if (projection_radius && !(*projection_radius > 0.0))
    throw ConfigError("flow projection radius must be positive");

  const bool have_analytic =
      projection_radius ? static_cast<bool>(sf.analytic_flow_proj) : static_cast<bool>(sf.analytic_flow);
  if (have_analytic && !cfg.force_numeric) {
    const long n_steps = static_cast<long>(std::ceil(cfg.horizon / cfg.dt));
    std::vector<double> times;
    std::vector<Vec> points;
    for (long k = 0; k <= n_steps; ++k) {
      const double t = std::min(k * cfg.dt, cfg.horizon);
      times.push_back(t);
      points.push_back(projection_radius ? sf.analytic_flow_proj(x0, t, *projection_radius)
                                         : sf.analytic_flow(x0, t));
    }
    return FlowSolution(std::move(times), std::move(points), true);
  }
  if (!sf.mean_clarke && !sf.mean_grad && !sf.space.finite())
    throw ProblemError(sf.name + ": no dF oracle for flow integration");
  return integrate_numeric(sf, x0, cfg, projection_radius);
}

DcResult dC_distance(const PathFn& a, const PathFn& b, double horizon, int pts_per_unit) {
  if (!(horizon > 0.0)) throw ConfigError("dC horizon must be positive");
  if (pts_per_unit < 10) throw ConfigError("dC grid resolution must be >= 10 points per unit time");
  const int terms = static_cast<int>(std::ceil(horizon));
  DcResult out;
  double running_sup = dist(a(0.0), b(0.0));
  for (int n = 1; n <= terms; ++n) {
    const double seg_lo = static_cast<double>(n - 1);
    const double seg_hi = std::min(static_cast<double>(n), horizon);
    const int pts = std::max(1, static_cast<int>(std::ceil((seg_hi - seg_lo) * pts_per_unit)));
    for (int k = 1; k <= pts; ++k) {
      const double t = seg_lo + (seg_hi - seg_lo) * static_cast<double>(k) / pts;
      running_sup = std::max(running_sup, dist(a(t), b(t)));
    }
    out.value += std::pow(2.0, -n) * std::min(1.0, running_sup);
  }
  out.tail_bound = std::pow(2.0, -terms);
  return out;
}

LinearGrowthReport check_linear_growth(const StochasticFunction& sf, const std::vector<Vec>& grid,
                                       double k_candidate) {
  LinearGrowthReport rep;
  rep.k_candidate = k_candidate;
  for (const auto& x : grid) {
    const double m = clarke_F(sf, x).max_generator_norm();
    rep.worst_ratio = std::max(rep.worst_ratio, m / (1.0 + norm(x)));
  }
  rep.passes = rep.worst_ratio <= k_candidate;
  return rep;
}

}  // namespace sgdlab
