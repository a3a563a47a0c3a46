#include "sgdlab/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "sgdlab/errors.hpp"

namespace sgdlab {

namespace {

// Runs body(i) for i in [0, n) on up to n_jobs threads. Results must go into
// preallocated per-index slots so the reduction order stays deterministic.
template <typename Body>
void parallel_for(long n, int n_jobs, const Body& body) {
  const int workers = static_cast<int>(std::max<long>(1, std::min<long>(n_jobs, n)));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mu;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string gamma_label(double gamma) {
  std::ostringstream os;
  os << "gamma=" << gamma;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void require_init(const InitLaw& init, bool allow_dirac, const char* op) {
  if (!init.absolutely_continuous() && !allow_dirac)
    throw ConfigError(std::string(op) + ": Dirac init requires the explicit override");
}

SgdConfig variant_config(const RunVariant& variant, SgdConfig cfg) {
  switch (variant.kind) {
    case RunVariant::Kind::Plain:
      break;
    case RunVariant::Kind::Projected:
      cfg.projection_radius = variant.radius;
      break;
    case RunVariant::Kind::Perturbed:
      cfg.perturbation = Perturbation{Perturbation::Law::Gaussian, variant.scale};
      break;
  }
  return cfg;
}

}  // namespace

std::string RunVariant::label() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Plain:
      os << "plain";
      break;
    case Kind::Projected:
      os << "projected(r=" << radius << ")";
      break;
    case Kind::Perturbed:
      os << "perturbed(scale=" << scale << ")";
      break;
  }
  return os.str();
}

ExperimentReport apt_probability(const StochasticFunction& sf, const std::vector<double>& gammas,
                                 double eps, double horizon, int n_runs, const InitLaw& init,
                                 std::uint64_t seed, int n_jobs, bool allow_dirac) {
  if (gammas.empty()) throw ConfigError("apt: need at least one step size");
  if (!(eps > 0.0) || !(horizon > 0.0)) throw ConfigError("apt: eps and horizon must be positive");
  if (n_runs < 1) throw ConfigError("apt: need at least one run");
  require_init(init, allow_dirac, "apt");
  if (!sf.flow_unique)
    throw ProblemError(sf.name +
                       ": flow not declared unique; the single-flow comparison is ill-posed");

  ExperimentReport rep;
  rep.op = "apt-check";
  const SelectionPolicy policy{};  // lazy

  for (double gamma : gammas) {
    if (!sf.step_admissible(gamma)) throw ConfigError(gamma_label(gamma) + " is excluded for " + sf.name);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<char> exceeded(n_runs, 0);
    parallel_for(n_runs, n_jobs, [&](long run) {
      SgdConfig cfg;
      cfg.gamma = gamma;
      cfg.n_steps = static_cast<long>(std::ceil(horizon / gamma));
      cfg.init = init;
      cfg.seed = seed;
      cfg.run_index = static_cast<std::uint64_t>(run);
      cfg.allow_dirac = allow_dirac;
      const Trajectory traj = run_sgd(sf, policy, cfg);

      FlowConfig fcfg;
      fcfg.horizon = horizon;
      fcfg.dt = std::min(1e-3, gamma);
      const FlowSolution flow = integrate_flow(sf, traj.point(0), fcfg);
      const PathFn a = [&traj](double t) { return traj.interpolate(t); };
      const DcResult d = dC_distance(a, as_path(flow), horizon);
      exceeded[run] = d.value > eps ? 1 : 0;
    });
    long hits = 0;
    for (char e : exceeded) hits += e;
    const double p_hat = static_cast<double>(hits) / n_runs;
    ReportRow row;
    row.label = gamma_label(gamma);
    row.param = gamma;
    row.estimate = p_hat;
    row.half_width = wilson_half_width(p_hat, n_runs);
    row.n = n_runs;
    row.seed = seed;
    row.runtime_s = seconds_since(t0);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

ExperimentReport longrun_criticality(const StochasticFunction& sf, const std::vector<double>& gammas,
                                     double eps, long n_burn, long n_meas, int n_runs,
                                     const InitLaw& init, const RunVariant& variant,
                                     std::uint64_t seed, int n_jobs, bool allow_dirac) {
  if (gammas.empty()) throw ConfigError("longrun: need at least one step size");
  if (!(eps > 0.0)) throw ConfigError("longrun: eps must be positive");
  if (n_burn < 0 || n_meas < 1 || n_runs < 1) throw ConfigError("longrun: bad run counts");
  require_init(init, allow_dirac, "longrun");

  const bool projected = variant.kind == RunVariant::Kind::Projected;
  if (variant.kind == RunVariant::Kind::Plain) {
    if (!sf.coercive)
      throw ProblemError(sf.name + ": not coercive; plain long-run occupation may escape");
    if (sf.critical_set && sf.critical_set->empty())
      throw ProblemError(sf.name + ": empty critical set; the exceedance target is vacuous");
  }
  if (projected && !sf.kkt_set)
    throw ProblemError(sf.name + ": no KKT set oracle for the projected variant");

  ExperimentReport rep;
  rep.op = "longrun";
  const SelectionPolicy policy{};

  for (double gamma : gammas) {
    if (!sf.step_admissible(gamma)) throw ConfigError(gamma_label(gamma) + " is excluded for " + sf.name);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> frac(n_runs, 0.0);
    parallel_for(n_runs, n_jobs, [&](long run) {
      SgdConfig cfg;
      cfg.gamma = gamma;
      cfg.n_steps = n_burn + n_meas;
      cfg.init = init;
      cfg.seed = seed;
      cfg.run_index = static_cast<std::uint64_t>(run);
      cfg.allow_dirac = allow_dirac;
      cfg = variant_config(variant, cfg);
      const Trajectory traj = run_sgd(sf, policy, cfg);
      long far = 0;
      for (long n = n_burn + 1; n <= n_burn + n_meas; ++n) {
        const double d = projected
                             ? distance_to_critical(sf, traj.point(n), CriticalVariant::Zr,
                                                    variant.radius)
                             : distance_to_critical(sf, traj.point(n));
        if (d > eps) ++far;
      }
      frac[run] = static_cast<double>(far) / static_cast<double>(n_meas);
    });
    double mean_frac = 0.0;
    for (double f : frac) mean_frac += f;
    mean_frac /= n_runs;
    double var = 0.0;
    for (double f : frac) var += (f - mean_frac) * (f - mean_frac);
    var /= std::max(1, n_runs - 1);

    ReportRow row;
    row.label = gamma_label(gamma) + "," + variant.label();
    row.param = gamma;
    row.estimate = mean_frac;
    row.half_width = 1.959963984540054 * std::sqrt(var / n_runs);
    row.n = static_cast<long>(n_runs) * n_meas;
    row.seed = seed;
    row.runtime_s = seconds_since(t0);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

double certified_drift_k(const StochasticFunction& sf) {
  if (sf.space.finite())
    throw ProblemError(sf.name + ": drift certificate covers the additive-noise quadratic only");
  return 0.5 + 0.5 * sf.noise_second_moment;
}

DriftCheckReport drift_check(const StochasticFunction& sf, double gamma,
                             const std::vector<Vec>& grid, double radius, double k_candidate,
                             long n_samples, std::uint64_t seed) {
  if (!(gamma > 0.0)) throw ConfigError("drift: gamma must be positive");
  if (!(radius > 0.0)) throw ConfigError("drift: radius must be positive");
  if (grid.empty()) throw ConfigError("drift: empty evaluation grid");

  DriftCheckReport rep;
  rep.gamma = gamma;
  rep.radius = radius;
  rep.k_certified = k_candidate;
  const auto g = [&sf](const Vec& y) { return mean_F(sf, y); };

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec& x = grid[i];
    const double fx = mean_F(sf, x);
    const auto gf = grad_F(sf, x);
    if (!gf) throw ProblemError(sf.name + ": drift grid point lies on the kink set of F");
    const bool outside = norm(x) > 2.0 * radius;
    double rhs = fx;
    if (outside) {
      rhs += -gamma * (1.0 - gamma * k_candidate) * sq_norm(*gf) + gamma * gamma * k_candidate;
    } else {
      rhs += gamma * k_candidate;
    }
    const McEstimate lhs =
        kernel_apply_mc(sf, gamma, x, g, n_samples, derive_seed(seed, Stream::Samples, i));
    DriftCheckRow row;
    row.x = x;
    row.lhs = lhs.estimate;
    row.rhs = rhs;
    row.half_width = lhs.half_width;
    row.margin = lhs.estimate - rhs;
    rep.rows.push_back(std::move(row));
  }
  rep.worst_margin = -std::numeric_limits<double>::infinity();
  rep.worst_margin_in_half_widths = rep.worst_margin;
  for (const auto& row : rep.rows) {
    rep.worst_margin = std::max(rep.worst_margin, row.margin);
    const double hw = std::max(row.half_width, 1e-300);
    rep.worst_margin_in_half_widths = std::max(rep.worst_margin_in_half_widths, row.margin / hw);
  }
  rep.passes = std::all_of(rep.rows.begin(), rep.rows.end(), [](const DriftCheckRow& row) {
    return row.margin <= 3.0 * row.half_width + 1e-12;
  });
  return rep;
}

std::string DriftCheckReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "drift-check: gamma " << gamma << ", R " << radius << ", K " << k_certified << ", "
     << rows.size() << " grid points, worst margin " << worst_margin << " ("
     << worst_margin_in_half_widths << " half-widths): " << (passes ? "holds" : "VIOLATED") << "\n";
  return os.str();
}

void DriftCheckReport::write_csv(std::ostream& os) const {
  os << "x0,norm_x,lhs,rhs,half_width,margin\n";
  os.precision(17);
  for (const auto& row : rows)
    os << row.x[0] << "," << norm(row.x) << "," << row.lhs << "," << row.rhs << ","
       << row.half_width << "," << row.margin << "\n";
}

SelectionEqualityReport selection_equality(const StochasticFunction& sf,
                                           const std::vector<SelectionPolicy>& policies,
                                           double gamma, long n_steps, int n_runs,
                                           const InitLaw& init, std::uint64_t seed, int n_jobs,
                                           bool allow_dirac) {
  if (policies.size() < 2) throw ConfigError("equal-selections: need at least two policies");
  if (!sf.step_admissible(gamma) && !allow_dirac)
    throw ConfigError(gamma_label(gamma) + " is excluded for " + sf.name +
                      " (override with the Dirac/admissibility flag)");
  require_init(init, allow_dirac, "equal-selections");

  SelectionEqualityReport rep;
  for (const auto& p : policies) rep.policies.push_back(p.label());
  rep.n_runs = n_runs;
  rep.n_steps = n_steps;

  std::vector<double> run_dev(n_runs, 0.0);
  std::vector<long> run_kinks(n_runs, 0);
  parallel_for(n_runs, n_jobs, [&](long run) {
    SgdConfig cfg;
    cfg.gamma = gamma;
    cfg.n_steps = n_steps;
    cfg.init = init;
    cfg.seed = seed;
    cfg.run_index = static_cast<std::uint64_t>(run);
    cfg.allow_dirac = allow_dirac;
    std::vector<Trajectory> trajs;
    trajs.reserve(policies.size());
    for (const auto& p : policies) trajs.push_back(run_sgd(sf, p, cfg));
    double dev = 0.0;
    for (long n = 0; n <= n_steps; ++n) {
      const Vec ref = trajs[0].point(n);
      for (std::size_t j = 1; j < trajs.size(); ++j)
        dev = std::max(dev, inf_dist(ref, trajs[j].point(n)));
    }
    run_dev[run] = dev;
    run_kinks[run] = static_cast<long>(trajs[0].kink_hits().size());
  });
  for (int run = 0; run < n_runs; ++run) {
    rep.max_deviation = std::max(rep.max_deviation, run_dev[run]);
    rep.total_kink_hits += run_kinks[run];
  }
  return rep;
}

std::string SelectionEqualityReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "equal-selections: " << policies.size() << " policies, " << n_runs << " runs x " << n_steps
     << " steps, " << total_kink_hits << " kink hits, max deviation " << max_deviation << "\n";
  return os.str();
}

StationaryHistogram stationary_histogram(const StochasticFunction& sf, double gamma,
                                         const RunVariant& variant, long n_burn, long n_meas,
                                         int bins, double eps, const InitLaw& init,
                                         std::uint64_t seed) {
  if (bins < 1) throw ConfigError("stationary: need at least one bin");
  if (n_burn < 0 || n_meas < 1) throw ConfigError("stationary: bad run counts");
  if (!sf.step_admissible(gamma)) throw ConfigError(gamma_label(gamma) + " is excluded for " + sf.name);
  if (variant.kind == RunVariant::Kind::Plain && !sf.coercive)
    throw ProblemError(sf.name + ": not coercive; the occupation measure may not settle");

  SgdConfig cfg;
  cfg.gamma = gamma;
  cfg.n_steps = n_burn + n_meas;
  cfg.init = init;
  cfg.seed = seed;
  cfg.allow_dirac = true;  // a single chain forgets its start after burn-in
  cfg = variant_config(variant, cfg);
  const Trajectory traj = run_sgd(sf, SelectionPolicy{}, cfg);
  const bool projected = variant.kind == RunVariant::Kind::Projected;

  StationaryHistogram hist;
  hist.lo = std::numeric_limits<double>::infinity();
  hist.hi = -hist.lo;
  std::vector<double> firsts;
  firsts.reserve(n_meas);
  long near = 0;
  for (long n = n_burn + 1; n <= n_burn + n_meas; ++n) {
    const Vec x = traj.point(n);
    firsts.push_back(x[0]);
    hist.lo = std::min(hist.lo, x[0]);
    hist.hi = std::max(hist.hi, x[0]);
    const double d = projected
                         ? distance_to_critical(sf, x, CriticalVariant::Zr, variant.radius)
                         : distance_to_critical(sf, x);
    if (d <= eps) ++near;
  }
  hist.total = n_meas;
  hist.mass_near_critical = static_cast<double>(near) / static_cast<double>(n_meas);
  hist.counts.assign(bins, 0);
  const double span = hist.hi > hist.lo ? hist.hi - hist.lo : 1.0;
  double sum = 0.0, sq = 0.0;
  for (double v : firsts) {
    int b = static_cast<int>((v - hist.lo) / span * bins);
    b = std::clamp(b, 0, bins - 1);
    ++hist.counts[b];
    sum += v;
  }
  hist.mean = sum / static_cast<double>(n_meas);
  for (double v : firsts) sq += (v - hist.mean) * (v - hist.mean);
  hist.variance = n_meas > 1 ? sq / static_cast<double>(n_meas - 1) : 0.0;
  return hist;
}

std::string StationaryHistogram::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "stationary: " << total << " post-burn-in iterates on [" << lo << ", " << hi << "], mean "
     << mean << ", variance " << variance << ", mass near critical " << mass_near_critical << "\n";
  return os.str();
}

void StationaryHistogram::write_csv(std::ostream& os) const {
  os << "bin_lo,bin_hi,count,density\n";
  os.precision(17);
  const int bins = static_cast<int>(counts.size());
  const double span = hi > lo ? hi - lo : 1.0;
  const double width = span / bins;
  for (int b = 0; b < bins; ++b)
    os << lo + b * width << "," << lo + (b + 1) * width << "," << counts[b] << ","
       << static_cast<double>(counts[b]) / (static_cast<double>(total) * width) << "\n";
}

InclusionReport strict_inclusion_report(const StochasticFunction& sf, const Vec& x) {
  InclusionReport rep{clarke_F(sf, x), mean_clarke_f(sf, x)};
  rep.hausdorff = ConvexGeneratorSet::hausdorff(rep.clarke_mean, rep.mean_clarke);
  const Vec origin = zeros(sf.dim);
  rep.zero_in_clarke_mean = rep.clarke_mean.contains(origin);
  rep.zero_in_mean_clarke = rep.mean_clarke.contains(origin);
  return rep;
}

std::string InclusionReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << "inclusion-report: Hausdorff(∂F, E∂f) = " << hausdorff
     << "; 0 in E∂f: " << (zero_in_mean_clarke ? "true" : "false")
     << "; 0 in ∂F: " << (zero_in_clarke_mean ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace sgdlab
