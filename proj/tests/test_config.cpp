#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sgdlab/builtins.hpp"
#include "sgdlab/config.hpp"
#include "sgdlab/errors.hpp"
#include "sgdlab/rng.hpp"
#include "sgdlab/sgd.hpp"

using namespace sgdlab;
using nlohmann::json;

namespace {

std::string write_temp(const std::string& text) {
  const std::string path = "test_config_tmp.json";
  std::ofstream os(path);
  os << text;
  return path;
}

}  // namespace

TEST_CASE("minimal config picks up the documented defaults") {
  const auto cfg = ExperimentConfig::from_json({{"problem", "abs"}});
  cfg.validate();
  CHECK(cfg.gamma == std::vector<double>{0.01});
  CHECK(cfg.steps == 1000);
  CHECK(cfg.runs == 100);
  CHECK(cfg.policy == "lazy");
  CHECK(cfg.eps == 0.1);
  CHECK(cfg.n_burn == -1);
  CHECK(cfg.resolved_burn(0.1) == 1000);  // ceil(10 / gamma^2)
  CHECK(cfg.resolved_burn(0.03) == 11112);
  const auto law = cfg.resolve_init(2);
  CHECK(law.absolutely_continuous());
  Rng rng(0);
  CHECK(law.draw(rng).size() == 2);
}

TEST_CASE("round-trip through json is lossless") {
  auto cfg = ExperimentConfig::from_json({{"problem", "relu-net"},
                                          {"params", {{"hidden", 3}}},
                                          {"gamma", {0.1, 0.01}},
                                          {"steps", 77},
                                          {"seed", 12345},
                                          {"policy", "clarke-extreme"},
                                          {"projection", {{"r", 2.0}}},
                                          {"x0", {0.5, -0.5}}});
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.problem == "relu-net");
  CHECK(back.gamma == std::vector<double>{0.1, 0.01});
  CHECK(back.projection_r.has_value());
  CHECK(*back.projection_r == 2.0);
  CHECK(back.x0 == std::vector<double>{0.5, -0.5});
}

TEST_CASE("validation lists every violation at once") {
  auto cfg = ExperimentConfig::from_json({{"problem", "abs"}});
  cfg.gamma = {0.0};
  cfg.steps = -1;
  cfg.runs = 0;
  cfg.problem = "not-a-problem";
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("step must be positive") != std::string::npos);
    CHECK(msg.find("steps") != std::string::npos);
    CHECK(msg.find("runs") != std::string::npos);
    CHECK(msg.find("not-a-problem") != std::string::npos);
  }
}

TEST_CASE("gamma list must be sorted strictly decreasing") {
  auto cfg = ExperimentConfig::from_json({{"problem", "abs"}});
  cfg.gamma = {0.01, 0.1};
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sorted strictly decreasing") != std::string::npos);
  }
  cfg.gamma = {0.1, 0.1};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.gamma = {0.1, 0.01};
  cfg.validate();
}

TEST_CASE("unknown keys are rejected, x aliases x0") {
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"problem", "abs"}, {"gama", {0.1}}}), ConfigError);
  const auto cfg = ExperimentConfig::from_json({{"problem", "abs"}, {"x", {0.25}}});
  CHECK(cfg.x0 == std::vector<double>{0.25});
}

TEST_CASE("init law resolution: dirac, uniform, gaussian, broadcast") {
  auto cfg = ExperimentConfig::from_json(
      {{"problem", "noisy-quadratic"}, {"init", {{"kind", "dirac"}, {"point", {1.0, 2.0}}}}});
  const auto dirac = cfg.resolve_init(2);
  CHECK(!dirac.absolutely_continuous());
  Rng rng(0);
  CHECK(dirac.draw(rng) == Vec{1.0, 2.0});

  cfg.init = {{"kind", "dirac"}, {"point", 0.5}};  // scalar broadcast
  CHECK(cfg.resolve_init(3).draw(rng) == Vec{0.5, 0.5, 0.5});

  cfg.init = {{"kind", "uniform"}, {"lo", -2.0}, {"hi", 2.0}};
  const auto uni = cfg.resolve_init(1);
  for (int i = 0; i < 100; ++i) {
    const Vec x = uni.draw(rng);
    CHECK(x[0] >= -2.0);
    CHECK(x[0] <= 2.0);
  }

  cfg.init = {{"kind", "gaussian"}, {"scale", 1.0}};
  CHECK(cfg.resolve_init(4).draw(rng).size() == 4);

  cfg.init = {{"kind", "cauchy"}};
  CHECK_THROWS_AS(cfg.resolve_init(1), ConfigError);
}

TEST_CASE("load_config reports parse errors and file errors") {
  const auto path = write_temp("{\"problem\": \"abs\", }");
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_config("no_such_file.json"), ConfigError);

  const auto good = write_temp(
      "{\"problem\": \"example51\", \"projection\": {\"r\": 1.0}, \"gamma\": [0.05]}");
  const auto cfg = load_config(good);
  std::remove(good.c_str());
  cfg.validate();
  CHECK(cfg.problem == "example51");
  CHECK(*cfg.projection_r == 1.0);
  // with r = 1 the constrained critical set of the builtin is {-1}
  const auto sf = make_example51();
  CHECK(distance_to_critical(sf, {-1.0}, CriticalVariant::Zr, 1.0) == 0.0);
  CHECK(distance_to_critical(sf, {0.0}, CriticalVariant::Zr, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("fnv1a64 and manifests") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("hello") != fnv1a64("hellp"));

  const auto cfg = ExperimentConfig::from_json({{"problem", "abs"}, {"seed", 77}});
  const auto m1 = RunManifest::for_config(cfg);
  const auto m2 = RunManifest::for_config(cfg);
  CHECK(m1.config_hash == m2.config_hash);
  CHECK(m1.master_seed == 77);
  CHECK(m1.init_seed == derive_seed(77, Stream::Init, 0));
  CHECK(m1.sample_seed == derive_seed(77, Stream::Samples, 0));
  CHECK(m1.perturb_seed == derive_seed(77, Stream::Perturbation, 0));
  CHECK(m1.init_seed != m1.sample_seed);

  auto other = cfg;
  other.seed = 78;
  CHECK(RunManifest::for_config(other).config_hash != m1.config_hash);

  const auto j = m1.to_json();
  CHECK(j.at("version") == kToolVersion);
  CHECK(j.contains("config_hash"));
  CHECK(j.contains("created_at"));
}

TEST_CASE("config-driven runs reproduce byte for byte") {
  const auto cfg = ExperimentConfig::from_json(
      {{"problem", "abs"}, {"gamma", {0.05}}, {"steps", 200}, {"seed", 4}});
  cfg.validate();
  const auto sf = make_builtin(cfg.problem);
  SgdConfig run;
  run.gamma = cfg.gamma[0];
  run.n_steps = cfg.steps;
  run.init = cfg.resolve_init(sf.dim);
  run.seed = cfg.seed;
  std::ostringstream a, b;
  run_sgd(sf, SelectionPolicy{}, run).write_csv(a);
  run_sgd(sf, SelectionPolicy{}, run).write_csv(b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("n,t,", 0) == 0);
}
