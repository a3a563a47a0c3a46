#ifndef SGDLAB_CONFIG_HPP_
#define SGDLAB_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgdlab/sgd.hpp"

namespace sgdlab {

inline constexpr const char* kToolVersion = "sgdlab 0.1.0";

/// One flat experiment configuration shared by every subcommand; unused keys
/// for a given subcommand are simply ignored by it. Defaults:
///   gamma [0.01], steps 1000, runs 100, seed 0, policy "lazy",
///   init uniform(-1,1)^dim, eps 0.1, horizon 2, dt 1e-4,
///   n_burn 10/gamma^2, n_meas 10000, bins 50, jobs 1.
struct ExperimentConfig {
  std::string problem;                       // builtin id, required
  nlohmann::json params = nlohmann::json::object();
  std::vector<double> gamma = {0.01};        // positive, sorted decreasing
  long steps = 1000;
  int runs = 100;
  std::uint64_t seed = 0;
  std::string policy = "lazy";
  nlohmann::json policy_params = nlohmann::json::object();
  nlohmann::json init;                       // absent: uniform(-1,1)^dim
  std::optional<double> projection_r;
  std::optional<double> perturbation_scale;  // Gaussian when set
  bool allow_dirac = false;
  double eps = 0.1;
  double horizon = 2.0;
  double dt = 1e-4;
  long n_burn = -1;                          // -1: resolve to ceil(10/gamma^2)
  long n_meas = 10000;
  int bins = 50;
  std::vector<double> x0;                    // flow start / inclusion point
  double drift_radius = 1.0;
  std::optional<double> drift_k;             // absent: certified constant
  long drift_samples = 200000;
  int jobs = 1;
  std::string out;                           // output directory; "" = cwd or $SGDLAB_OUT

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  /// Collects every violation; throws one ConfigError listing all of them.
  void validate() const;

  InitLaw resolve_init(int dim) const;
  long resolved_burn(double g) const;
};

/// Parses and validates a config file. Parse errors carry the line reported
/// by the JSON reader; validation errors list all violations at once.
ExperimentConfig load_config(const std::string& path);

/// Everything needed to reproduce a run byte for byte (timestamps excepted).
struct RunManifest {
  std::uint64_t config_hash = 0;   // FNV-1a of the canonical config JSON
  std::uint64_t master_seed = 0;
  std::uint64_t init_seed = 0, sample_seed = 0, perturb_seed = 0;  // run 0 streams
  std::string version = kToolVersion;
  std::string created_at;          // ISO 8601, excluded from reproducibility
  std::vector<std::string> outputs;

  static RunManifest for_config(const ExperimentConfig& cfg);
  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace sgdlab

#endif  // SGDLAB_CONFIG_HPP_
