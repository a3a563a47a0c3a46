#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sgdlab/builtins.hpp"
#include "sgdlab/config.hpp"
#include "sgdlab/diagnostics.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/flow.hpp"
#include "sgdlab/sgd.hpp"

namespace {

using namespace sgdlab;

constexpr int kExitOk = 0;
constexpr int kExitAssert = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

struct CliOverrides {
  std::string config_path;
  std::optional<std::string> problem, policy, policies, out, variant;
  std::optional<std::vector<double>> gamma;
  std::optional<long> steps, n_burn, n_meas, drift_samples;
  std::optional<int> runs, jobs, bins;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps, horizon, dt, r, scale, drift_radius, drift_k, min_mass;
  std::optional<std::vector<double>> x0;
  bool allow_dirac = false;
  bool do_assert = false;
};

// Registers the shared option set on a subcommand; per-command extras are
// added by the caller.
void add_common(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config file (flags win)");
  cmd->add_option("--problem", o.problem, "builtin problem id");
  cmd->add_option("--gamma", o.gamma, "step size list, decreasing");
  cmd->add_option("--steps", o.steps, "iteration count");
  cmd->add_option("--runs", o.runs, "Monte Carlo run count");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory (default $SGDLAB_OUT or .)");
  cmd->add_option("--jobs", o.jobs, "worker threads");
  cmd->add_option("--eps", o.eps, "tolerance radius");
  cmd->add_flag("--allow-dirac", o.allow_dirac, "permit Dirac inits in diagnostics");
  cmd->add_flag("--assert", o.do_assert, "nonzero exit on acceptance violation");
}

ExperimentConfig resolve(const CliOverrides& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  if (o.problem) cfg.problem = *o.problem;
  if (o.gamma) cfg.gamma = *o.gamma;
  if (o.steps) cfg.steps = *o.steps;
  if (o.runs) cfg.runs = *o.runs;
  if (o.seed) cfg.seed = *o.seed;
  if (o.policy) cfg.policy = *o.policy;
  if (o.eps) cfg.eps = *o.eps;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.dt) cfg.dt = *o.dt;
  if (o.r) cfg.projection_r = *o.r;
  if (o.scale) cfg.perturbation_scale = *o.scale;
  if (o.n_burn) cfg.n_burn = *o.n_burn;
  if (o.n_meas) cfg.n_meas = *o.n_meas;
  if (o.bins) cfg.bins = *o.bins;
  if (o.x0) cfg.x0 = *o.x0;
  if (o.drift_radius) cfg.drift_radius = *o.drift_radius;
  if (o.drift_k) cfg.drift_k = *o.drift_k;
  if (o.drift_samples) cfg.drift_samples = *o.drift_samples;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.out) cfg.out = *o.out;
  if (o.allow_dirac) cfg.allow_dirac = true;
  cfg.validate();
  return cfg;
}

std::string out_dir(const ExperimentConfig& cfg) {
  if (!cfg.out.empty()) return cfg.out;
  if (const char* env = std::getenv("SGDLAB_OUT")) return env;
  return ".";
}

std::string write_artifact(const ExperimentConfig& cfg, const std::string& name,
                           const std::function<void(std::ostream&)>& body) {
  const std::string dir = out_dir(cfg);
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  body(os);
  return path;
}

void finish(const ExperimentConfig& cfg, std::vector<std::string> outputs) {
  RunManifest manifest = RunManifest::for_config(cfg);
  manifest.outputs = std::move(outputs);
  const std::string dir = out_dir(cfg);
  std::filesystem::create_directories(dir);
  manifest.write(dir + "/manifest.json");
}

Vec default_x0(const ExperimentConfig& cfg, int dim) {
  if (!cfg.x0.empty()) {
    if (static_cast<int>(cfg.x0.size()) == 1 && dim > 1) {
      Vec x = zeros(dim);
      x[0] = cfg.x0[0];
      return x;
    }
    if (static_cast<int>(cfg.x0.size()) != dim) throw ConfigError("x0 dimension mismatch");
    return cfg.x0;
  }
  return zeros(dim);
}

RunVariant resolve_variant(const ExperimentConfig& cfg) {
  if (cfg.projection_r) return RunVariant::projected(*cfg.projection_r);
  if (cfg.perturbation_scale) return RunVariant::perturbed(*cfg.perturbation_scale);
  return RunVariant::plain();
}

int cmd_run(const ExperimentConfig& cfg) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  const auto policy = SelectionPolicy::parse(cfg.policy, cfg.policy_params);
  SgdConfig scfg;
  scfg.gamma = cfg.gamma.front();
  scfg.n_steps = cfg.steps;
  scfg.init = cfg.resolve_init(sf.dim);
  scfg.projection_radius = cfg.projection_r;
  if (cfg.perturbation_scale)
    scfg.perturbation = Perturbation{Perturbation::Law::Gaussian, *cfg.perturbation_scale};
  scfg.seed = cfg.seed;
  scfg.allow_dirac = true;  // a single trajectory carries no diagnostic claim
  const Trajectory traj = run_sgd(sf, policy, scfg);
  const auto path =
      write_artifact(cfg, "trajectory.csv", [&](std::ostream& os) { traj.write_csv(os); });
  const Vec xf = traj.point(traj.n_steps());
  std::cout << "run: " << cfg.problem << ", policy " << policy.label() << ", gamma " << scfg.gamma
            << ", " << scfg.n_steps << " steps, " << traj.kink_hits().size()
            << " kink hits, final |x| " << norm(xf) << "\n"
            << "wrote " << path << "\n";
  finish(cfg, {path});
  return kExitOk;
}

int cmd_flow(const ExperimentConfig& cfg) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  FlowConfig fcfg;
  fcfg.dt = cfg.dt;
  fcfg.horizon = cfg.horizon;
  const FlowSolution sol = integrate_flow(sf, default_x0(cfg, sf.dim), fcfg, cfg.projection_r);
  const auto path = write_artifact(cfg, "flow.csv", [&](std::ostream& os) { sol.write_csv(os); });
  std::cout << "flow: " << cfg.problem << (sol.analytic() ? " (closed form)" : " (numeric)")
            << ", T " << cfg.horizon << ", final |x| " << norm(sol.at(sol.horizon())) << "\n"
            << "wrote " << path << "\n";
  finish(cfg, {path});
  return kExitOk;
}

int report_and_assert_trend(const ExperimentConfig& cfg, const ExperimentReport& rep,
                            const std::string& csv_name, bool do_assert) {
  const auto path = write_artifact(cfg, csv_name, [&](std::ostream& os) { rep.write_csv(os); });
  std::cout << rep.summary() << "wrote " << path << "\n";
  finish(cfg, {path});
  if (!do_assert) return kExitOk;
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double slack = 2.0 * (rep.rows[i - 1].half_width + rep.rows[i].half_width);
    if (rep.rows[i].estimate > rep.rows[i - 1].estimate + slack) {
      std::cerr << "assert: estimate not non-increasing across the gamma list ("
                << rep.rows[i - 1].estimate << " -> " << rep.rows[i].estimate << ")\n";
      return kExitAssert;
    }
  }
  return kExitOk;
}

int cmd_apt(const ExperimentConfig& cfg, bool do_assert) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  const auto rep = apt_probability(sf, cfg.gamma, cfg.eps, cfg.horizon, cfg.runs,
                                   cfg.resolve_init(sf.dim), cfg.seed, cfg.jobs, cfg.allow_dirac);
  return report_and_assert_trend(cfg, rep, "apt.csv", do_assert);
}

int cmd_longrun(const ExperimentConfig& cfg, bool do_assert) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  const auto rep = longrun_criticality(sf, cfg.gamma, cfg.eps, cfg.resolved_burn(cfg.gamma.front()),
                                       cfg.n_meas, cfg.runs, cfg.resolve_init(sf.dim),
                                       resolve_variant(cfg), cfg.seed, cfg.jobs, cfg.allow_dirac);
  return report_and_assert_trend(cfg, rep, "longrun.csv", do_assert);
}

int cmd_drift(const ExperimentConfig& cfg, bool do_assert) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  const double k = cfg.drift_k ? *cfg.drift_k : certified_drift_k(sf);
  std::vector<Vec> grid;
  for (int i = 0; i <= 20; ++i) {
    Vec x = zeros(sf.dim);
    x[0] = 0.5 * i;
    grid.push_back(std::move(x));
  }
  const auto rep = drift_check(sf, cfg.gamma.front(), grid, cfg.drift_radius, k,
                               cfg.drift_samples, cfg.seed);
  const auto path =
      write_artifact(cfg, "drift.csv", [&](std::ostream& os) { rep.write_csv(os); });
  std::cout << rep.summary() << "wrote " << path << "\n";
  finish(cfg, {path});
  if (do_assert && !rep.passes) {
    std::cerr << "assert: drift inequality violated beyond 3 half-widths\n";
    return kExitAssert;
  }
  return kExitOk;
}

int cmd_equal(const ExperimentConfig& cfg, const std::string& policies_csv, bool do_assert) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  std::vector<SelectionPolicy> policies;
  std::stringstream ss(policies_csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) policies.push_back(SelectionPolicy::parse(item, cfg.policy_params));
  const auto rep = selection_equality(sf, policies, cfg.gamma.front(), cfg.steps, cfg.runs,
                                      cfg.resolve_init(sf.dim), cfg.seed, cfg.jobs,
                                      cfg.allow_dirac);
  std::cout << rep.summary();
  finish(cfg, {});
  if (do_assert && rep.max_deviation > 1e-9) {
    std::cerr << "assert: policies deviate by " << rep.max_deviation << " > 1e-9\n";
    return kExitAssert;
  }
  return kExitOk;
}

int cmd_stationary(const ExperimentConfig& cfg, double min_mass, bool do_assert) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  const double g = cfg.gamma.front();
  const auto hist = stationary_histogram(sf, g, resolve_variant(cfg), cfg.resolved_burn(g),
                                         cfg.n_meas, cfg.bins, cfg.eps, cfg.resolve_init(sf.dim),
                                         cfg.seed);
  const auto path =
      write_artifact(cfg, "stationary.csv", [&](std::ostream& os) { hist.write_csv(os); });
  std::cout << hist.summary() << "wrote " << path << "\n";
  finish(cfg, {path});
  if (do_assert && hist.mass_near_critical < min_mass) {
    std::cerr << "assert: mass near critical " << hist.mass_near_critical << " < " << min_mass
              << "\n";
    return kExitAssert;
  }
  return kExitOk;
}

int cmd_inclusion(const ExperimentConfig& cfg, bool do_assert) {
  const auto sf = make_builtin(cfg.problem, cfg.params);
  const auto rep = strict_inclusion_report(sf, default_x0(cfg, sf.dim));
  std::cout << rep.summary();
  finish(cfg, {});
  if (do_assert) {
    // dF(x) is always a subset of E df(x, .); the reverse may fail.
    for (const auto& gen : rep.clarke_mean.generators())
      if (!rep.mean_clarke.contains(gen)) {
        std::cerr << "assert: found a generator of the mean-function set outside E df\n";
        return kExitAssert;
      }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-step SGD laboratory for nonsmooth stochastic optimization"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string policies_csv = "lazy,clarke-min-norm,clarke-extreme:right,norkin";
  double min_mass = 0.99;

  auto* run = app.add_subcommand("run", "simulate one SGD trajectory and export CSV");
  add_common(run, o);
  run->add_option("--policy", o.policy, "selection policy name");
  run->add_option("--r", o.r, "projection ball radius");
  run->add_option("--scale", o.scale, "Gaussian perturbation scale");

  auto* flow = app.add_subcommand("flow", "integrate the subgradient flow from x0");
  add_common(flow, o);
  flow->add_option("--x0", o.x0, "initial point");
  flow->add_option("--T", o.horizon, "horizon");
  flow->add_option("--dt", o.dt, "Euler step");
  flow->add_option("--project", o.r, "projection ball radius");

  auto* apt = app.add_subcommand("apt-check", "weak almost-sure-approximation probability vs gamma");
  add_common(apt, o);
  apt->add_option("--T", o.horizon, "comparison horizon");

  auto* longrun = app.add_subcommand("longrun", "post-burn-in distance-to-critical exceedance");
  add_common(longrun, o);
  longrun->add_option("--burn", o.n_burn, "burn-in steps (default 10/gamma^2)");
  longrun->add_option("--meas", o.n_meas, "measurement steps");
  longrun->add_option("--r", o.r, "projected variant radius");
  longrun->add_option("--scale", o.scale, "perturbed variant scale");

  auto* drift = app.add_subcommand("drift-check", "one-step drift inequality on a grid");
  add_common(drift, o);
  drift->add_option("--R", o.drift_radius, "drift radius R");
  drift->add_option("--K", o.drift_k, "drift constant (default certified)");
  drift->add_option("--samples", o.drift_samples, "Monte Carlo samples per grid point");

  auto* equal = app.add_subcommand("equal-selections", "policy-independence check");
  add_common(equal, o);
  equal->add_option("--policies", policies_csv, "comma-separated policy names");

  auto* stationary = app.add_subcommand("stationary", "empirical occupation histogram");
  add_common(stationary, o);
  stationary->add_option("--burn", o.n_burn, "burn-in steps");
  stationary->add_option("--meas", o.n_meas, "measurement steps");
  stationary->add_option("--bins", o.bins, "histogram bins");
  stationary->add_option("--r", o.r, "projected variant radius");
  stationary->add_option("--scale", o.scale, "perturbed variant scale");
  stationary->add_option("--min-mass", min_mass, "asserted mass near the critical set");

  auto* inclusion = app.add_subcommand("inclusion-report", "Clarke-set interchange comparison");
  add_common(inclusion, o);
  inclusion->add_option("--x", o.x0, "evaluation point");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = resolve(o);
    if (run->parsed()) return cmd_run(cfg);
    if (flow->parsed()) return cmd_flow(cfg);
    if (apt->parsed()) return cmd_apt(cfg, o.do_assert);
    if (longrun->parsed()) return cmd_longrun(cfg, o.do_assert);
    if (drift->parsed()) return cmd_drift(cfg, o.do_assert);
    if (equal->parsed()) return cmd_equal(cfg, policies_csv, o.do_assert);
    if (stationary->parsed()) return cmd_stationary(cfg, min_mass, o.do_assert);
    if (inclusion->parsed()) return cmd_inclusion(cfg, o.do_assert);
    std::cerr << "unknown subcommand\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
