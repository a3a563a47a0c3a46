#include "sgdlab/sgd.hpp"

#include <cmath>
#include <ostream>

#include "sgdlab/errors.hpp"

namespace sgdlab {

InitLaw InitLaw::dirac(Vec p) {
  InitLaw l;
  l.kind = Kind::Dirac;
  l.point = std::move(p);
  return l;
}

InitLaw InitLaw::uniform(Vec lo, Vec hi) {
  InitLaw l;
  l.kind = Kind::UniformBox;
  l.lo = std::move(lo);
  l.hi = std::move(hi);
  return l;
}

InitLaw InitLaw::gaussian(Vec mean, double scale) {
  InitLaw l;
  l.kind = Kind::Gaussian;
  l.mean = std::move(mean);
  l.scale = scale;
  return l;
}

Vec InitLaw::draw(Rng& rng) const {
  switch (kind) {
    case Kind::Dirac: return point;
    case Kind::UniformBox: return rng.uniform_box(lo, hi);
    case Kind::Gaussian: {
      Vec v = rng.gaussian_vec(mean.size(), 0.0, scale);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += mean[i];
      return v;
    }
  }
  throw ConfigError("unreachable init kind");
}

Vec Perturbation::draw(Rng& rng, int dim) const {
  Vec v(dim, 0.0);
  if (!active()) return v;
  if (law == Law::Gaussian)
    for (auto& e : v) e = scale * rng.gaussian();
  else
    for (auto& e : v) e = rng.uniform(-scale, scale);
  return v;
}

void SgdConfig::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("step gamma must be positive");
  if (n_steps < 0) throw ConfigError("n_steps must be nonnegative");
  if (projection_radius && !(*projection_radius > 0.0))
    throw ConfigError("projection radius must be positive");
  if (perturbation.scale < 0.0) throw ConfigError("perturbation scale must be nonnegative");
}

Trajectory::Trajectory(double gamma, int dim) : gamma_(gamma), dim_(dim) {
  data_.reserve(1024);
}

Vec Trajectory::point(long n) const {
  if (n < 0 || n > n_steps()) throw ConfigError("trajectory index out of range");
  return Vec(data_.begin() + n * dim_, data_.begin() + (n + 1) * dim_);
}

Vec Trajectory::interpolate(double t) const {
  if (t < 0.0 || t > horizon() * (1.0 + 1e-12)) throw ConfigError("interpolation time out of range");
  const double u = t / gamma_;
  long n = static_cast<long>(std::floor(u));
  if (n >= n_steps()) n = n_steps() - 1;
  if (n < 0) n = 0;
  const double frac = u - static_cast<double>(n);
  Vec out(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double a = data_[n * dim_ + i];
    const double b = data_[(n + 1) * dim_ + i];
    out[i] = a + frac * (b - a);
  }
  return out;
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "n,t";
  for (int i = 0; i < dim_; ++i) os << ",x" << i;
  os << ",kink_hit\n";
  std::size_t hit_idx = 0;
  for (long n = 0; n <= n_steps(); ++n) {
    os << n << "," << gamma_ * static_cast<double>(n);
    for (int i = 0; i < dim_; ++i) os << "," << data_[n * dim_ + i];
    bool hit = false;
    while (hit_idx < kink_hits_.size() && kink_hits_[hit_idx] < n) ++hit_idx;
    if (hit_idx < kink_hits_.size() && kink_hits_[hit_idx] == n) hit = true;
    os << "," << (hit ? 1 : 0) << "\n";
  }
}

Vec project_ball(const Vec& y, double r) {
  const double n = norm(y);
  if (n <= r) return y;
  return scaled(y, r / n);
}

Trajectory run_sgd(const StochasticFunction& sf, const SelectionPolicy& policy,
                   const SgdConfig& cfg) {
  cfg.validate();
  Trajectory traj(cfg.gamma, sf.dim);
  traj.init_seed = derive_seed(cfg.seed, Stream::Init, cfg.run_index);
  traj.sample_seed = derive_seed(cfg.seed, Stream::Samples, cfg.run_index);
  traj.perturb_seed = derive_seed(cfg.seed, Stream::Perturbation, cfg.run_index);

  Rng init_rng(traj.init_seed);
  Rng sample_rng(traj.sample_seed);
  Rng perturb_rng(traj.perturb_seed);

  Vec x = cfg.init.draw(init_rng);
  if (static_cast<int>(x.size()) != sf.dim)
    throw ConfigError("init law dimension does not match the problem");
  traj.append(x);

  for (long n = 0; n < cfg.n_steps; ++n) {
    const Sample s = sf.draw(sample_rng);
    if (sf.is_kink(x, s)) traj.log_kink(n);
    const Vec v = select(policy, sf, x, s);
    axpy(-cfg.gamma, v, x);
    if (cfg.perturbation.active()) {
      const Vec eps = cfg.perturbation.draw(perturb_rng, sf.dim);
      axpy(cfg.gamma, eps, x);
    }
    if (cfg.projection_radius) x = project_ball(x, *cfg.projection_radius);
    if (!all_finite(x) || norm(x) > cfg.divergence_guard)
      throw DivergenceError(sf.name + ": iterate diverged at step " + std::to_string(n + 1), n + 1);
    traj.append(x);
  }
  return traj;
}

McEstimate kernel_apply_mc(const StochasticFunction& sf, double gamma, const Vec& x,
                           const std::function<double(const Vec&)>& g, long n_samples,
                           std::uint64_t seed) {
  const SelectionPolicy lazy;  // kernel is defined through the lazy selection
  McEstimate out;
  if (sf.space.finite()) {
    double v = 0.0;
    for (int a = 0; a < sf.space.num_atoms(); ++a) {
      Vec y = x;
      axpy(-gamma, select(lazy, sf, x, Sample::of_atom(a)), y);
      v += sf.space.weights[a] * g(y);
    }
    out.estimate = v;
    out.n = sf.space.num_atoms();
    out.exact = true;
    return out;
  }
  if (n_samples < 1) throw ConfigError("kernel_apply_mc: n_samples must be >= 1");
  Rng rng(derive_seed(seed, Stream::Samples));
  double sum = 0.0, sum_sq = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const Sample s = sf.draw(rng);
    Vec y = x;
    axpy(-gamma, select(lazy, sf, x, s), y);
    const double v = g(y);
    sum += v;
    sum_sq += v * v;
  }
  out.estimate = sum / n_samples;
  const double var = std::max(0.0, sum_sq / n_samples - out.estimate * out.estimate);
  out.half_width = 1.96 * std::sqrt(var / n_samples);
  out.n = n_samples;
  return out;
}

ConditionalMeanResult conditional_mean_check(const StochasticFunction& sf,
                                             const SelectionPolicy& policy, const Vec& x,
                                             double gamma, long n_samples, std::uint64_t seed) {
  // reject points on the kink set of F
  for (double k : sf.mean_kinks)
    if (sf.dim == 1 && x[0] == k)
      throw ConfigError("conditional_mean_check: x lies on a kink of F");
  auto gF = grad_F(sf, x);
  if (!gF) throw ConfigError("conditional_mean_check: grad F absent at x");

  ConditionalMeanResult out;
  if (sf.space.finite()) {
    for (int a = 0; a < sf.space.num_atoms(); ++a)
      if (sf.is_kink(x, Sample::of_atom(a)))
        throw ConfigError("conditional_mean_check: x lies on a per-sample kink set");
    Vec mean_sel(sf.dim, 0.0);
    for (int a = 0; a < sf.space.num_atoms(); ++a)
      axpy(sf.space.weights[a], select(policy, sf, x, Sample::of_atom(a)), mean_sel);
    out.deviation = gamma * dist(mean_sel, *gF);
    out.exact = true;
    return out;
  }
  Rng rng(derive_seed(seed, Stream::Samples));
  Vec mean_sel(sf.dim, 0.0);
  double sum_sq = 0.0;
  for (long i = 0; i < n_samples; ++i) {
    const Sample s = sf.draw(rng);
    const Vec v = select(policy, sf, x, s);
    axpy(1.0, v, mean_sel);
    sum_sq += sq_norm(v);
  }
  for (auto& e : mean_sel) e /= static_cast<double>(n_samples);
  out.deviation = gamma * dist(mean_sel, *gF);
  const double var = std::max(0.0, sum_sq / n_samples - sq_norm(mean_sel));
  out.std_error = gamma * std::sqrt(var / n_samples);
  return out;
}

}  // namespace sgdlab
