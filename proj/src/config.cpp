#include "sgdlab/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "sgdlab/builtins.hpp"
#include "sgdlab/errors.hpp"

namespace sgdlab {

namespace {

using nlohmann::json;

Vec as_vec(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<Vec>();
}

json init_or_default(const json& init) {
  if (!init.is_null() && !init.empty()) return init;
  return json{{"kind", "uniform"}, {"lo", -1.0}, {"hi", 1.0}};
}

}  // namespace

json ExperimentConfig::to_json() const {
  json j;
  j["problem"] = problem;
  if (!params.empty()) j["params"] = params;
  j["gamma"] = gamma;
  j["steps"] = steps;
  j["runs"] = runs;
  j["seed"] = seed;
  j["policy"] = policy;
  if (!policy_params.empty()) j["policy_params"] = policy_params;
  j["init"] = init_or_default(init);
  if (projection_r) j["projection"] = json{{"r", *projection_r}};
  if (perturbation_scale) j["perturbation"] = json{{"law", "gaussian"}, {"scale", *perturbation_scale}};
  if (allow_dirac) j["allow_dirac"] = true;
  j["eps"] = eps;
  j["horizon"] = horizon;
  j["dt"] = dt;
  j["n_burn"] = n_burn;
  j["n_meas"] = n_meas;
  j["bins"] = bins;
  if (!x0.empty()) j["x0"] = x0;
  j["drift"] = json{{"radius", drift_radius}, {"samples", drift_samples}};
  if (drift_k) j["drift"]["k"] = *drift_k;
  j["jobs"] = jobs;
  if (!out.empty()) j["out"] = out;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  std::vector<std::string> unknown;
  static const char* known[] = {"problem", "params", "gamma", "steps", "runs", "seed",
                                "policy", "policy_params", "init", "projection", "perturbation",
                                "allow_dirac", "eps", "horizon", "dt", "n_burn", "n_meas",
                                "bins", "x0", "x", "drift", "jobs", "out"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const char* k : known) found = found || it.key() == k;
    if (!found) unknown.push_back(it.key());
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  try {
    if (j.contains("problem")) cfg.problem = j.at("problem").get<std::string>();
    if (j.contains("params")) cfg.params = j.at("params");
    if (j.contains("gamma")) {
      if (j.at("gamma").is_number())
        cfg.gamma = {j.at("gamma").get<double>()};
      else
        cfg.gamma = j.at("gamma").get<std::vector<double>>();
    }
    if (j.contains("steps")) cfg.steps = j.at("steps").get<long>();
    if (j.contains("runs")) cfg.runs = j.at("runs").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("policy")) cfg.policy = j.at("policy").get<std::string>();
    if (j.contains("policy_params")) cfg.policy_params = j.at("policy_params");
    if (j.contains("init")) cfg.init = j.at("init");
    if (j.contains("projection")) cfg.projection_r = j.at("projection").at("r").get<double>();
    if (j.contains("perturbation")) {
      const auto& p = j.at("perturbation");
      if (p.contains("law") && p.at("law") != "gaussian")
        throw ConfigError("perturbation law must be gaussian");
      cfg.perturbation_scale = p.at("scale").get<double>();
    }
    if (j.contains("allow_dirac")) cfg.allow_dirac = j.at("allow_dirac").get<bool>();
    if (j.contains("eps")) cfg.eps = j.at("eps").get<double>();
    if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<double>();
    if (j.contains("dt")) cfg.dt = j.at("dt").get<double>();
    if (j.contains("n_burn")) cfg.n_burn = j.at("n_burn").get<long>();
    if (j.contains("n_meas")) cfg.n_meas = j.at("n_meas").get<long>();
    if (j.contains("bins")) cfg.bins = j.at("bins").get<int>();
    if (j.contains("x0")) cfg.x0 = as_vec(j.at("x0"));
    if (j.contains("x")) cfg.x0 = as_vec(j.at("x"));  // alias for point queries
    if (j.contains("drift")) {
      const auto& d = j.at("drift");
      if (d.contains("radius")) cfg.drift_radius = d.at("radius").get<double>();
      if (d.contains("k")) cfg.drift_k = d.at("k").get<double>();
      if (d.contains("samples")) cfg.drift_samples = d.at("samples").get<long>();
    }
    if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<int>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  if (problem.empty()) {
    errors.push_back("problem is required");
  } else {
    const auto ids = builtin_ids();
    if (std::find(ids.begin(), ids.end(), problem) == ids.end())
      errors.push_back("unknown problem \"" + problem + "\"");
  }
  if (gamma.empty()) errors.push_back("gamma list must be nonempty");
  for (double g : gamma)
    if (!(g > 0.0)) errors.push_back("step must be positive");
  for (std::size_t i = 1; i < gamma.size(); ++i)
    if (gamma[i] >= gamma[i - 1]) {
      errors.push_back("gamma list must be sorted strictly decreasing");
      break;
    }
  if (steps < 1) errors.push_back("steps must be >= 1");
  if (runs < 1) errors.push_back("runs must be >= 1");
  if (projection_r && !(*projection_r > 0.0)) errors.push_back("projection radius must be positive");
  if (perturbation_scale && !(*perturbation_scale > 0.0))
    errors.push_back("perturbation scale must be positive");
  if (!(eps > 0.0)) errors.push_back("eps must be positive");
  if (!(horizon > 0.0)) errors.push_back("horizon must be positive");
  if (!(dt > 0.0)) errors.push_back("dt must be positive");
  if (n_meas < 1) errors.push_back("n_meas must be >= 1");
  if (bins < 1) errors.push_back("bins must be >= 1");
  if (!(drift_radius > 0.0)) errors.push_back("drift radius must be positive");
  if (drift_samples < 1) errors.push_back("drift samples must be >= 1");
  if (jobs < 1) errors.push_back("jobs must be >= 1");
  if (!init.is_null() && !init.empty() && !init.contains("kind"))
    errors.push_back("init needs a kind (dirac | uniform | gaussian)");

  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
}

InitLaw ExperimentConfig::resolve_init(int dim) const {
  const json j = init_or_default(init);
  const std::string kind = j.at("kind").get<std::string>();
  const auto broadcast = [dim](const json& v, double fallback) {
    if (v.is_null()) return Vec(dim, fallback);
    Vec out = v.is_number() ? Vec(dim, v.get<double>()) : v.get<Vec>();
    if (static_cast<int>(out.size()) != dim) throw ConfigError("init vector dimension mismatch");
    return out;
  };
  if (kind == "dirac") return InitLaw::dirac(broadcast(j.value("point", json()), 0.0));
  if (kind == "uniform")
    return InitLaw::uniform(broadcast(j.value("lo", json()), -1.0),
                            broadcast(j.value("hi", json()), 1.0));
  if (kind == "gaussian")
    return InitLaw::gaussian(broadcast(j.value("mean", json()), 0.0), j.value("scale", 1.0));
  throw ConfigError("unknown init kind \"" + kind + "\"");
}

long ExperimentConfig::resolved_burn(double g) const {
  if (n_burn >= 0) return n_burn;
  return static_cast<long>(std::ceil(10.0 / (g * g)));
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << "parse error in " << path << " at byte " << e.byte << ": " << e.what();
    throw ConfigError(os.str());
  }
  return ExperimentConfig::from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

RunManifest RunManifest::for_config(const ExperimentConfig& cfg) {
  RunManifest m;
  m.config_hash = fnv1a64(cfg.to_json().dump());
  m.master_seed = cfg.seed;
  m.init_seed = derive_seed(cfg.seed, Stream::Init, 0);
  m.sample_seed = derive_seed(cfg.seed, Stream::Samples, 0);
  m.perturb_seed = derive_seed(cfg.seed, Stream::Perturbation, 0);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  m.created_at = buf;
  return m;
}

nlohmann::json RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["master_seed"] = master_seed;
  j["stream_seeds"] = json{{"init", init_seed}, {"samples", sample_seed}, {"perturbation", perturb_seed}};
  j["version"] = version;
  j["created_at"] = created_at;
  j["outputs"] = outputs;
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write manifest " + path);
  out << to_json().dump(2) << "\n";
}

}  // namespace sgdlab
