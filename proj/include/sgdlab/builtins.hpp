#ifndef SGDLAB_BUILTINS_HPP_
#define SGDLAB_BUILTINS_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgdlab/problem.hpp"

namespace sgdlab {

// Fully-oracled builtin test problems. Each carries exact per-sample
// gradients/Clarke sets, exact F oracles, critical/KKT descriptors where they
// exist, its admissible-step exclusions, and (where closed forms exist)
// analytic subgradient flows.

/// Two atoms, f(x,1) = 2x 1_{x<=0}, f(x,2) = 2x 1_{x>=0}; F(x) = x. The
/// strict-inclusion counterexample: no critical point, KKT point {-r}.
StochasticFunction make_example51();

/// f(x,s) = |x| + s x with s = +/-1 equiprobable; F = |x|.
StochasticFunction make_abs();

/// Two-atom split with F(x) = -|x| (not regular at its critical point 0).
StochasticFunction make_neg_abs();

/// Noiseless f(x,s) = 0.5 x^2; step 1 is excluded (x_1 = 0 kills densities).
StochasticFunction make_quadratic();

/// f(x,s) = 0.5 ||x||^2 + <s, x> with s uniform on [-1,1]^dim (bounded,
/// zero-mean). Satisfies the sufficient drift conditions by construction.
StochasticFunction make_noisy_quadratic(int dim = 1);

/// Deterministic g(x) = x^2 sin(1/x): differentiable at 0 with gradient 0 but
/// Clarke set [-1, 1] there (not regular).
StochasticFunction make_oscillatory();

struct ReluNetParams {
  int input_dim = 2;
  int hidden = 3;
  int n_data = 8;
  std::uint64_t data_seed = 1234;
};

/// One-hidden-layer ReLU network squared loss over a finite generated
/// dataset; weights are the optimization variable, one computation graph per
/// data point.
StochasticFunction make_relu_net(const ReluNetParams& params = {});

/// String-id registry used by the CLI and configs. Known ids: example51, abs,
/// neg-abs, quadratic, noisy-quadratic, oscillatory, relu-net.
StochasticFunction make_builtin(const std::string& id, const nlohmann::json& params = nlohmann::json::object());

StochasticFunction make_builtin_from_config(const std::string& config_text);

std::vector<std::string> builtin_ids();

}  // namespace sgdlab

#endif  // SGDLAB_BUILTINS_HPP_
