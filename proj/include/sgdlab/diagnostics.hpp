#ifndef SGDLAB_DIAGNOSTICS_HPP_
#define SGDLAB_DIAGNOSTICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "sgdlab/flow.hpp"
#include "sgdlab/report.hpp"
#include "sgdlab/sgd.hpp"

namespace sgdlab {

/// Run variant for the long-run experiments.
struct RunVariant {
  enum class Kind { Plain, Projected, Perturbed };
  Kind kind = Kind::Plain;
  double radius = 1.0;  // Projected
  double scale = 0.0;   // Perturbed (Gaussian)

  static RunVariant plain() { return {}; }
  static RunVariant projected(double r) { return {Kind::Projected, r, 0.0}; }
  static RunVariant perturbed(double scale) { return {Kind::Perturbed, 1.0, scale}; }
  std::string label() const;
};

/// P(dC(interpolated SGD path, subgradient flow from the same x0) > eps) per
/// step size, estimated over n_runs with Wilson 95% half-widths. Requires an
/// absolutely continuous init and a builtin that declares flow uniqueness.
ExperimentReport apt_probability(const StochasticFunction& sf, const std::vector<double>& gammas,
                                 double eps, double horizon, int n_runs, const InitLaw& init,
                                 std::uint64_t seed, int n_jobs = 1, bool allow_dirac = false);

/// Post-burn-in exceedance fraction of d(x_n, Z) > eps (or Z_r for the
/// projected variant), standing in for the stationary probability.
ExperimentReport longrun_criticality(const StochasticFunction& sf, const std::vector<double>& gammas,
                                     double eps, long n_burn, long n_meas, int n_runs,
                                     const InitLaw& init, const RunVariant& variant,
                                     std::uint64_t seed, int n_jobs = 1, bool allow_dirac = false);

struct DriftCheckRow {
  Vec x;
  double lhs = 0.0;        // Monte Carlo P_gamma F(x)
  double rhs = 0.0;        // drift bound at x
  double half_width = 0.0;
  double margin = 0.0;     // lhs - rhs; positive means violation
};

struct DriftCheckReport {
  double gamma = 0.0, radius = 0.0, k_certified = 0.0;
  std::vector<DriftCheckRow> rows;
  double worst_margin = 0.0;
  double worst_margin_in_half_widths = 0.0;
  bool passes = false;  // worst violation <= 3 Monte Carlo half-widths
  std::string summary() const;
  void write_csv(std::ostream& os) const;
};

/// Checks P_gamma F(x) <= F(x) - gamma (1 - gamma K) 1_{||x|| > 2R} ||grad F||^2
///                      + gamma^2 K 1_{||x|| > 2R} + gamma K 1_{||x|| <= 2R}
/// on the given grid, with P_gamma F estimated by kernel_apply_mc.
DriftCheckReport drift_check(const StochasticFunction& sf, double gamma,
                             const std::vector<Vec>& grid, double radius, double k_candidate,
                             long n_samples, std::uint64_t seed);

/// Certified drift constant for the noisy quadratic (from the closed-form
/// kernel): K = 1/2 + E||s||^2 / 2.
double certified_drift_k(const StochasticFunction& sf);

struct SelectionEqualityReport {
  std::vector<std::string> policies;
  double max_deviation = 0.0;  // max over runs, steps, policy pairs
  long total_kink_hits = 0;
  int n_runs = 0;
  long n_steps = 0;
  std::string summary() const;
};

/// Runs all policies with identical init and sample streams and reports the
/// max pairwise sup-deviation of the trajectories.
SelectionEqualityReport selection_equality(const StochasticFunction& sf,
                                           const std::vector<SelectionPolicy>& policies,
                                           double gamma, long n_steps, int n_runs,
                                           const InitLaw& init, std::uint64_t seed, int n_jobs = 1,
                                           bool allow_dirac = false);

struct StationaryHistogram {
  double lo = 0.0, hi = 0.0;
  std::vector<long> counts;     // occupation counts per bin (first coordinate)
  long total = 0;
  double mass_near_critical = 0.0;  // empirical pi_gamma(B(Z, eps))
  double mean = 0.0, variance = 0.0;
  std::string summary() const;
  void write_csv(std::ostream& os) const;
};

/// Empirical occupation measure of a single long chain after burn-in,
/// standing in for the invariant law pi_gamma.
StationaryHistogram stationary_histogram(const StochasticFunction& sf, double gamma,
                                         const RunVariant& variant, long n_burn, long n_meas,
                                         int bins, double eps, const InitLaw& init,
                                         std::uint64_t seed);

struct InclusionReport {
  ConvexGeneratorSet clarke_mean;     // dF(x)
  ConvexGeneratorSet mean_clarke;     // E df(x, .)
  double hausdorff = 0.0;
  bool zero_in_clarke_mean = false;
  bool zero_in_mean_clarke = false;
  std::string summary() const;
};

/// Structured comparison of dF(x) against E df(x, .); witnesses the strict
/// inclusion on the counterexample problem.
InclusionReport strict_inclusion_report(const StochasticFunction& sf, const Vec& x);

}  // namespace sgdlab

#endif  // SGDLAB_DIAGNOSTICS_HPP_
