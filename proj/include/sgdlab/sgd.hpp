#ifndef SGDLAB_SGD_HPP_
#define SGDLAB_SGD_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "sgdlab/problem.hpp"
#include "sgdlab/selection.hpp"

namespace sgdlab {

struct InitLaw {
  enum class Kind { Dirac, UniformBox, Gaussian };
  Kind kind = Kind::UniformBox;
  Vec point;         // Dirac
  Vec lo, hi;        // UniformBox
  Vec mean;          // Gaussian
  double scale = 1;  // Gaussian

  bool absolutely_continuous() const { return kind != Kind::Dirac; }
  Vec draw(Rng& rng) const;

  static InitLaw dirac(Vec p);
  static InitLaw uniform(Vec lo, Vec hi);
  static InitLaw uniform1(double lo, double hi) { return uniform({lo}, {hi}); }
  static InitLaw gaussian(Vec mean, double scale);
};

struct Perturbation {
  enum class Law { None, Gaussian, UniformBox };
  Law law = Law::None;
  double scale = 0.0;

  bool active() const { return law != Law::None && scale > 0.0; }
  Vec draw(Rng& rng, int dim) const;
};

/// Full configuration of one SGD run. The master seed splits into
/// (init, sample, perturbation) streams keyed additionally by run_index, so
/// different policies under the same (seed, run_index) share all randomness.
struct SgdConfig {
  double gamma = 0.01;
  long n_steps = 1000;
  InitLaw init;
  std::optional<double> projection_radius;  // ball projection when set
  Perturbation perturbation;
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
  bool allow_dirac = false;       // diagnostics refuse Dirac inits without this
  double divergence_guard = 1e12;

  void validate() const;
};

/// An iterate sequence with its piecewise-affine interpolant and kink-hit
/// log. Iterates are stored flat, (n_steps + 1) x dim.
class Trajectory {
 public:
  Trajectory(double gamma, int dim);

  double gamma() const { return gamma_; }
  int dim() const { return dim_; }
  long n_steps() const { return static_cast<long>(data_.size() / dim_) - 1; }
  double horizon() const { return gamma_ * static_cast<double>(n_steps()); }

  Vec point(long n) const;
  const std::vector<long>& kink_hits() const { return kink_hits_; }

  /// Affine interpolation on [n*gamma, (n+1)*gamma]; t must lie in
  /// [0, n_steps * gamma].
  Vec interpolate(double t) const;

  void append(const Vec& x) { data_.insert(data_.end(), x.begin(), x.end()); }
  void log_kink(long n) { kink_hits_.push_back(n); }

  std::uint64_t init_seed = 0, sample_seed = 0, perturb_seed = 0;

  /// CSV with columns n,t,x0..x{d-1},kink_hit.
  void write_csv(std::ostream& os) const;

 private:
  double gamma_;
  int dim_;
  std::vector<double> data_;
  std::vector<long> kink_hits_;
};

/// Constant-step SGD (plain, projected, or perturbed per the config).
Trajectory run_sgd(const StochasticFunction& sf, const SelectionPolicy& policy,
                   const SgdConfig& cfg);

/// Radial projection onto the closed ball of radius r.
Vec project_ball(const Vec& y, double r);

struct McEstimate {
  double estimate = 0.0;
  double half_width = 0.0;  // 0 for exact finite-space sums
  long n = 0;
  bool exact = false;
};

/// One-step Markov kernel applied to a test function g, with lazy selection.
/// Exact weighted sum for finite spaces, Monte Carlo otherwise.
McEstimate kernel_apply_mc(const StochasticFunction& sf, double gamma, const Vec& x,
                           const std::function<double(const Vec&)>& g, long n_samples,
                           std::uint64_t seed);

struct ConditionalMeanResult {
  double deviation = 0.0;
  double std_error = 0.0;  // 0 for exact sums
  bool exact = false;
};

/// || E[x - gamma select] - (x - gamma grad F(x)) || at an a.e. point x;
/// rejects points on the kink set of F or of any atom.
ConditionalMeanResult conditional_mean_check(const StochasticFunction& sf,
                                             const SelectionPolicy& policy, const Vec& x,
                                             double gamma, long n_samples, std::uint64_t seed);

}  // namespace sgdlab

#endif  // SGDLAB_SGD_HPP_
