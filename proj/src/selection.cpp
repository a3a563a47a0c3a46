#include "sgdlab/selection.hpp"

#include <algorithm>
#include <cmath>

#include "sgdlab/errors.hpp"

namespace sgdlab {

std::string SelectionPolicy::label() const {
  switch (kind) {
    case Kind::Lazy: return "lazy";
    case Kind::ClarkeMinNorm: return "clarke-min-norm";
    case Kind::ClarkeExtreme: return "clarke-extreme:" + extreme_rule;
    case Kind::Norkin: return "norkin";
    case Kind::FixedAtKinks: return "fixed-at-kinks";
    case Kind::GraphBackprop: return "backprop";
  }
  return "?";
}

SelectionPolicy SelectionPolicy::parse(const std::string& name, const nlohmann::json& params) {
  SelectionPolicy p;
  if (name == "lazy") {
    p.kind = Kind::Lazy;
  } else if (name == "clarke-min-norm") {
    p.kind = Kind::ClarkeMinNorm;
  } else if (name.rfind("clarke-extreme", 0) == 0) {
    p.kind = Kind::ClarkeExtreme;
    const auto colon = name.find(':');
    p.extreme_rule = colon == std::string::npos ? "first-generator" : name.substr(colon + 1);
    static const char* rules[] = {"left", "right", "max-norm", "first-generator"};
    if (std::find(std::begin(rules), std::end(rules), p.extreme_rule) == std::end(rules))
      throw ConfigError("unknown clarke-extreme rule: " + p.extreme_rule);
  } else if (name == "norkin") {
    // On the builtin family the Norkin generalized subdifferential coincides
    // with the Clarke set; distinct label, same selection.
    p.kind = Kind::Norkin;
  } else if (name == "fixed-at-kinks") {
    p.kind = Kind::FixedAtKinks;
    if (params.contains("kinks")) {
      for (const auto& [key, val] : params.at("kinks").items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos)
          throw ConfigError("fixed-at-kinks key must be 'kinkId,atom': " + key);
        const int kink_id = std::stoi(key.substr(0, comma));
        const int atom = std::stoi(key.substr(comma + 1));
        p.kink_map[{kink_id, atom}] = val.get<Vec>();
      }
    }
  } else if (name == "backprop") {
    p.kind = Kind::GraphBackprop;
  } else {
    throw ConfigError("unknown selection policy: " + name);
  }
  return p;
}

namespace {

Vec extreme_generator(const ConvexGeneratorSet& set, const std::string& rule) {
  const auto& gens = set.generators();
  if (rule == "first-generator") return gens.front();
  if (rule == "max-norm") {
    std::size_t best = 0;
    for (std::size_t i = 1; i < gens.size(); ++i)
      if (norm(gens[i]) > norm(gens[best])) best = i;
    return gens[best];
  }
  if (set.dim() != 1) throw PolicyError("clarke-extreme rule '" + rule + "' is 1D only");
  return rule == "left" ? Vec{set.lo()} : Vec{set.hi()};
}

}  // namespace

Vec select(const SelectionPolicy& policy, const StochasticFunction& sf, const Vec& x,
           const Sample& s) {
  if (policy.kind == SelectionPolicy::Kind::GraphBackprop) {
    if (!sf.has_graphs())
      throw PolicyError("backprop policy requires a problem with computation graphs");
    return sf.graph_for(s).backprop(x);
  }
  if (!sf.is_kink(x, s)) {
    auto g = grad_f(sf, x, s);
    if (!g) throw ProblemError(sf.name + ": gradient absent off the kink set");
    return *g;
  }
  switch (policy.kind) {
    case SelectionPolicy::Kind::Lazy:
      return zeros(sf.dim);
    case SelectionPolicy::Kind::ClarkeMinNorm:
    case SelectionPolicy::Kind::Norkin:
      return clarke_f(sf, x, s).min_norm_element();
    case SelectionPolicy::Kind::ClarkeExtreme:
      return extreme_generator(clarke_f(sf, x, s), policy.extreme_rule);
    case SelectionPolicy::Kind::FixedAtKinks: {
      const auto ids = sf.kink_ids(x, s);
      if (ids.empty()) throw PolicyError("kink hit without kink id");
      const auto it = policy.kink_map.find({ids.front(), s.atom});
      if (it == policy.kink_map.end())
        throw PolicyError("fixed-at-kinks: no entry for kink " + std::to_string(ids.front()) +
                          ", sample " + std::to_string(s.atom));
      if (!clarke_f(sf, x, s).contains(it->second, 1e-12))
        throw PolicyError("fixed-at-kinks: selected vector outside the Clarke set");
      return it->second;
    }
    default:
      break;
  }
  throw PolicyError("unreachable selection kind");
}

PolicyValidationReport validate_policy(const SelectionPolicy& policy, const StochasticFunction& sf,
                                       long n_samples, std::uint64_t seed) {
  PolicyValidationReport rep;
  rep.n_samples = n_samples;
  Rng x_rng(derive_seed(seed, Stream::Init));
  Rng s_rng(derive_seed(seed, Stream::Samples));
  for (long i = 0; i < n_samples; ++i) {
    const Vec x = x_rng.gaussian_vec(sf.dim);
    const Sample s = sf.draw(s_rng);
    if (sf.is_kink(x, s)) {
      ++rep.kink_hits;
      continue;
    }
    const Vec v = select(policy, sf, x, s);
    const auto g = grad_f(sf, x, s);
    const double dev = g ? inf_dist(v, *g) : std::numeric_limits<double>::infinity();
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (dev > 1e-12) ++rep.mismatches;
  }
  return rep;
}

}  // namespace sgdlab
