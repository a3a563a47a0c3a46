#include "sgdlab/problem.hpp"

#include <algorithm>
#include <cmath>

#include "sgdlab/errors.hpp"

namespace sgdlab {

void SampleSpace::validate() const {
  if (kind == Kind::Finite) {
    if (weights.empty()) throw ProblemError("finite sample space without atoms");
    double sum = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw ProblemError("negative atom weight");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) throw ProblemError("atom weights do not sum to 1");
  } else {
    if (sampler_id.empty()) throw ProblemError("continuous space without sampler id");
  }
}

double Piecewise1D::value(double x) const {
  for (const auto& bp : breakpoints)
    if (x == bp.x) return bp.value;
  for (const auto& c : cells)
    if (x > c.lo && x < c.hi) return c.value(x);
  throw ProblemError("point outside all cells (malformed problem)");
}

std::optional<double> Piecewise1D::deriv(double x) const {
  for (const auto& bp : breakpoints) {
    if (x == bp.x) {
      if (bp.differentiable) return bp.grad;
      return std::nullopt;
    }
  }
  for (const auto& c : cells)
    if (x > c.lo && x < c.hi) return c.deriv(x);
  throw ProblemError("point outside all cells (malformed problem)");
}

bool Piecewise1D::at_kink(double x) const {
  for (const auto& bp : breakpoints)
    if (x == bp.x && !bp.differentiable) return true;
  return false;
}

int Piecewise1D::kink_id(double x) const {
  for (std::size_t i = 0; i < breakpoints.size(); ++i)
    if (x == breakpoints[i].x && !breakpoints[i].differentiable) return static_cast<int>(i);
  return -1;
}

ConvexGeneratorSet Piecewise1D::clarke(double x) const {
  for (const auto& bp : breakpoints) {
    if (x == bp.x) {
      std::vector<Vec> gens;
      for (double g : bp.clarke_gens) gens.push_back({g});
      return ConvexGeneratorSet(std::move(gens), 1);
    }
  }
  for (const auto& c : cells)
    if (x > c.lo && x < c.hi) return ConvexGeneratorSet::singleton({c.deriv(x)});
  throw ProblemError("point outside all cells (malformed problem)");
}

void Piecewise1D::validate() const {
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    if (!(breakpoints[i].x < breakpoints[i + 1].x))
      throw ProblemError("breakpoints not sorted");
  for (const auto& bp : breakpoints)
    if (bp.clarke_gens.empty()) throw ProblemError("breakpoint without Clarke generators");
  for (std::size_t i = 0; i + 1 < cells.size(); ++i)
    if (cells[i].hi > cells[i + 1].lo) throw ProblemError("overlapping cells");
}

double CriticalSet::distance(const Vec& x) const {
  if (elements.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& box : elements) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double c = std::clamp(x[i], box.lo[i], box.hi[i]);
      s += (x[i] - c) * (x[i] - c);
    }
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

Sample StochasticFunction::draw(Rng& rng) const {
  if (space.finite()) return Sample::of_atom(rng.categorical(space.weights));
  if (!sampler) throw ProblemError("continuous space without sampler");
  return Sample::of_value(sampler(rng));
}

bool StochasticFunction::step_admissible(double gamma) const {
  for (double g : excluded_steps)
    if (gamma == g) return false;
  return gamma > 0.0;
}

const CompGraph& StochasticFunction::graph_for(const Sample& s) const {
  if (graphs.empty()) throw ProblemError(name + ": no computation graphs");
  if (s.atom < 0 || s.atom >= static_cast<int>(graphs.size()))
    throw ProblemError("unknown sample id for graph lookup");
  return graphs[s.atom];
}

namespace {

void check_sample(const StochasticFunction& sf, const Sample& s) {
  if (sf.space.finite()) {
    if (s.atom < 0 || s.atom >= sf.space.num_atoms())
      throw ProblemError(sf.name + ": unknown sample id");
  } else {
    if (static_cast<int>(s.value.size()) != sf.space.sample_dim)
      throw ProblemError(sf.name + ": sample value dimension mismatch");
  }
}

void check_point(const StochasticFunction& sf, const Vec& x) {
  if (static_cast<int>(x.size()) != sf.dim)
    throw ProblemError(sf.name + ": point dimension mismatch");
  if (!all_finite(x)) throw ProblemError(sf.name + ": non-finite point");
}

}  // namespace

double eval_f(const StochasticFunction& sf, const Vec& x, const Sample& s) {
  check_point(sf, x);
  check_sample(sf, s);
  return sf.eval(x, s);
}

std::optional<Vec> grad_f(const StochasticFunction& sf, const Vec& x, const Sample& s) {
  check_point(sf, x);
  check_sample(sf, s);
  return sf.gradient(x, s);
}

ConvexGeneratorSet clarke_f(const StochasticFunction& sf, const Vec& x, const Sample& s) {
  check_point(sf, x);
  check_sample(sf, s);
  return sf.clarke(x, s);
}

double mean_F(const StochasticFunction& sf, const Vec& x) {
  check_point(sf, x);
  if (sf.mean) return sf.mean(x);
  if (!sf.space.finite())
    throw ProblemError(sf.name + ": oracle unavailable for continuous space");
  double v = 0.0;
  for (int a = 0; a < sf.space.num_atoms(); ++a)
    v += sf.space.weights[a] * sf.eval(x, Sample::of_atom(a));
  return v;
}

std::optional<Vec> grad_F(const StochasticFunction& sf, const Vec& x) {
  check_point(sf, x);
  if (sf.mean_grad) return sf.mean_grad(x);
  if (!sf.space.finite())
    throw ProblemError(sf.name + ": oracle unavailable for continuous space");
  Vec g(sf.dim, 0.0);
  for (int a = 0; a < sf.space.num_atoms(); ++a) {
    auto ga = sf.gradient(x, Sample::of_atom(a));
    if (!ga) return std::nullopt;
    axpy(sf.space.weights[a], *ga, g);
  }
  return g;
}

ConvexGeneratorSet clarke_F(const StochasticFunction& sf, const Vec& x) {
  check_point(sf, x);
  if (sf.mean_clarke) return sf.mean_clarke(x);
  auto g = grad_F(sf, x);
  if (g) return ConvexGeneratorSet::singleton(*g);
  // No exact oracle at a kink of F: fall back to the Minkowski average, which
  // contains the Clarke set.
  return mean_clarke_f(sf, x);
}

ConvexGeneratorSet mean_clarke_f(const StochasticFunction& sf, const Vec& x) {
  check_point(sf, x);
  if (!sf.space.finite()) throw ProblemError(sf.name + ": finite space required");
  std::vector<Vec> acc{Vec(sf.dim, 0.0)};
  for (int a = 0; a < sf.space.num_atoms(); ++a) {
    const auto set = sf.clarke(x, Sample::of_atom(a));
    const double w = sf.space.weights[a];
    std::vector<Vec> next;
    next.reserve(acc.size() * set.generators().size());
    for (const auto& base : acc)
      for (const auto& g : set.generators()) {
        Vec v = base;
        axpy(w, g, v);
        next.push_back(std::move(v));
      }
    if (next.size() > 65536) throw ProblemError("mean_clarke_f: generator blowup");
    acc = std::move(next);
  }
  // dedupe exact duplicates
  std::sort(acc.begin(), acc.end());
  acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
  return ConvexGeneratorSet(std::move(acc), sf.dim);
}

double distance_to_critical(const StochasticFunction& sf, const Vec& x, CriticalVariant variant,
                            double r) {
  check_point(sf, x);
  if (variant == CriticalVariant::Z) {
    if (!sf.critical_set) throw ProblemError(sf.name + ": critical-set descriptor missing");
    return sf.critical_set->distance(x);
  }
  if (!sf.kkt_set) throw ProblemError(sf.name + ": KKT-set descriptor missing");
  if (r <= 0.0) throw ProblemError("KKT radius must be positive");
  return sf.kkt_set(r).distance(x);
}

std::vector<double> quadratic_excluded_steps(const std::vector<double>& hessian_eigenvalues) {
  std::vector<double> out;
  for (double lambda : hessian_eigenvalues)
    if (lambda != 0.0) out.push_back(1.0 / lambda);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace sgdlab
