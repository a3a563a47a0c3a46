#ifndef SGDLAB_SELECTION_HPP_
#define SGDLAB_SELECTION_HPP_

#include <map>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "sgdlab/problem.hpp"

namespace sgdlab {

/// An a.e.-gradient rule phi(x, s): every variant returns exactly grad_f(x,s)
/// off the kink set; variants differ only in what they report at kinks.
struct SelectionPolicy {
  enum class Kind { Lazy, ClarkeMinNorm, ClarkeExtreme, Norkin, FixedAtKinks, GraphBackprop };

  Kind kind = Kind::Lazy;
  // ClarkeExtreme tie-breaking: "left", "right", "max-norm" (1D),
  // "first-generator" (any dimension)
  std::string extreme_rule = "first-generator";
  // (kink-id, atom) -> chosen vector; entries must lie in clarke_f
  std::map<std::pair<int, int>, Vec> kink_map;

  std::string label() const;

  /// Parse from a CLI/config name: lazy | clarke-min-norm |
  /// clarke-extreme:<rule> | norkin | fixed-at-kinks | backprop.
  /// FixedAtKinks entries come from params["kinks"] as {"kinkId,atom": [v...]}.
  static SelectionPolicy parse(const std::string& name,
                               const nlohmann::json& params = nlohmann::json::object());
};

Vec select(const SelectionPolicy& policy, const StochasticFunction& sf, const Vec& x,
           const Sample& s);

struct PolicyValidationReport {
  long n_samples = 0;
  long mismatches = 0;
  long kink_hits = 0;
  double max_deviation = 0.0;
  bool ok() const { return mismatches == 0; }
};

/// Draws n random (x, s) pairs with x standard Gaussian and checks that the
/// policy reproduces grad_f at every non-kink hit.
PolicyValidationReport validate_policy(const SelectionPolicy& policy, const StochasticFunction& sf,
                                       long n_samples, std::uint64_t seed);

}  // namespace sgdlab

#endif  // SGDLAB_SELECTION_HPP_
