#include "sgdlab/builtins.hpp"

#include <algorithm>
#include <cmath>

#include "sgdlab/errors.hpp"

namespace sgdlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SampleSpace two_atoms(const std::string& desc) {
  SampleSpace sp;
  sp.kind = SampleSpace::Kind::Finite;
  sp.weights = {0.5, 0.5};
  sp.description = desc;
  return sp;
}

SampleSpace one_atom(const std::string& desc) {
  SampleSpace sp;
  sp.kind = SampleSpace::Kind::Finite;
  sp.weights = {1.0};
  sp.description = desc;
  return sp;
}

// Wire the per-sample interface of a 1D finite builtin from its cell lists.
// The closures share ownership of the cell tables, so the returned object can
// be freely copied.
StochasticFunction finalize(StochasticFunction sf) {
  sf.space.validate();
  for (const auto& pw : sf.per_atom_1d) pw.validate();
  auto holder = std::make_shared<std::vector<Piecewise1D>>(sf.per_atom_1d);
  StochasticFunction out = std::move(sf);
  out.eval = [holder](const Vec& x, const Sample& s) { return (*holder)[s.atom].value(x[0]); };
  out.is_kink = [holder](const Vec& x, const Sample& s) { return (*holder)[s.atom].at_kink(x[0]); };
  out.gradient = [holder](const Vec& x, const Sample& s) -> std::optional<Vec> {
    auto d = (*holder)[s.atom].deriv(x[0]);
    if (!d) return std::nullopt;
    return Vec{*d};
  };
  out.clarke = [holder](const Vec& x, const Sample& s) { return (*holder)[s.atom].clarke(x[0]); };
  out.kink_ids = [holder](const Vec& x, const Sample& s) {
    std::vector<int> ids;
    const int id = (*holder)[s.atom].kink_id(x[0]);
    if (id >= 0) ids.push_back(id);
    return ids;
  };
  return out;
}

SmoothCell cell(double lo, double hi, std::function<double(double)> v,
                std::function<double(double)> d) {
  SmoothCell c;
  c.lo = lo;
  c.hi = hi;
  c.value = std::move(v);
  c.deriv = std::move(d);
  return c;
}

GraphNode affine(std::vector<int> parents, Vec weights, double bias = 0.0) {
  GraphNode n;
  n.kind = OpKind::Affine;
  n.parents = std::move(parents);
  n.weights = std::move(weights);
  n.bias = bias;
  return n;
}

GraphNode unary(OpKind k, int parent) {
  GraphNode n;
  n.kind = k;
  n.parents = {parent};
  return n;
}

nlohmann::json config_json(const std::string& id, const nlohmann::json& params) {
  return nlohmann::json{{"problem", id}, {"params", params}};
}

}  // namespace

StochasticFunction make_example51() {
  StochasticFunction sf;
  sf.name = "example51";
  sf.config_text = config_json("example51", nlohmann::json::object()).dump();
  sf.dim = 1;
  sf.space = two_atoms("two equiprobable atoms");

  Piecewise1D a0;  // f(x,1) = 2x 1_{x<=0}
  a0.cells = {cell(-kInf, 0.0, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }),
              cell(0.0, kInf, [](double) { return 0.0; }, [](double) { return 0.0; })};
  a0.breakpoints = {{0.0, 0.0, {0.0, 2.0}, false, 0.0}};
  Piecewise1D a1;  // f(x,2) = 2x 1_{x>=0}
  a1.cells = {cell(-kInf, 0.0, [](double) { return 0.0; }, [](double) { return 0.0; }),
              cell(0.0, kInf, [](double x) { return 2.0 * x; }, [](double) { return 2.0; })};
  a1.breakpoints = {{0.0, 0.0, {0.0, 2.0}, false, 0.0}};
  sf.per_atom_1d = {a0, a1};

  sf.mean = [](const Vec& x) { return x[0]; };
  sf.mean_grad = [](const Vec&) -> std::optional<Vec> { return Vec{1.0}; };
  sf.mean_clarke = [](const Vec&) { return ConvexGeneratorSet::singleton({1.0}); };
  sf.critical_set = CriticalSet::empty_set();  // dF == {1} never contains 0
  sf.kkt_set = [](double r) { return CriticalSet::point({-r}); };
  sf.lipschitz_bound = [](double) { return 2.0; };
  sf.flow_unique = true;
  sf.analytic_flow = [](const Vec& x0, double t) { return Vec{x0[0] - t}; };
  sf.analytic_flow_proj = [](const Vec& x0, double t, double r) {
    return Vec{std::max(x0[0] - t, -r)};
  };

  // graphs: f(x,1) = -relu(-2x), f(x,2) = relu(2x)
  sf.graphs.push_back(CompGraph(
      1, {affine({0}, {-2.0}), unary(OpKind::Relu, 1), affine({2}, {-1.0})}));
  sf.graphs.push_back(CompGraph(1, {affine({0}, {2.0}), unary(OpKind::Relu, 1)}));
  return finalize(std::move(sf));
}

StochasticFunction make_abs() {
  StochasticFunction sf;
  sf.name = "abs";
  sf.config_text = config_json("abs", nlohmann::json::object()).dump();
  sf.dim = 1;
  sf.space = two_atoms("s = +1 / -1 equiprobable");

  for (double s : {+1.0, -1.0}) {
    Piecewise1D pw;
    pw.cells = {cell(-kInf, 0.0, [s](double x) { return -x + s * x; }, [s](double) { return -1.0 + s; }),
                cell(0.0, kInf, [s](double x) { return x + s * x; }, [s](double) { return 1.0 + s; })};
    pw.breakpoints = {{0.0, 0.0, {s - 1.0, s + 1.0}, false, 0.0}};
    sf.per_atom_1d.push_back(pw);
    sf.graphs.push_back(CompGraph(1, {unary(OpKind::Abs, 0), affine({1, 0}, {1.0, s})}));
  }

  sf.mean = [](const Vec& x) { return std::fabs(x[0]); };
  sf.mean_grad = [](const Vec& x) -> std::optional<Vec> {
    if (x[0] == 0.0) return std::nullopt;
    return Vec{x[0] > 0.0 ? 1.0 : -1.0};
  };
  sf.mean_clarke = [](const Vec& x) {
    if (x[0] == 0.0) return ConvexGeneratorSet::interval(-1.0, 1.0);
    return ConvexGeneratorSet::singleton({x[0] > 0.0 ? 1.0 : -1.0});
  };
  sf.critical_set = CriticalSet::point({0.0});
  sf.kkt_set = [](double) { return CriticalSet::point({0.0}); };
  sf.lipschitz_bound = [](double) { return 2.0; };
  sf.mean_kinks = {0.0};
  sf.coercive = true;
  sf.flow_unique = true;
  sf.analytic_flow = [](const Vec& x0, double t) {
    const double sgn = x0[0] >= 0.0 ? 1.0 : -1.0;
    return Vec{sgn * std::max(std::fabs(x0[0]) - t, 0.0)};
  };
  sf.analytic_flow_proj = [](const Vec& x0, double t, double) {
    const double sgn = x0[0] >= 0.0 ? 1.0 : -1.0;
    return Vec{sgn * std::max(std::fabs(x0[0]) - t, 0.0)};
  };
  return finalize(std::move(sf));
}

StochasticFunction make_neg_abs() {
  StochasticFunction sf;
  sf.name = "neg-abs";
  sf.config_text = config_json("neg-abs", nlohmann::json::object()).dump();
  sf.dim = 1;
  sf.space = two_atoms("two-atom split of -|x|");

  Piecewise1D a0;  // -2x 1_{x>=0}
  a0.cells = {cell(-kInf, 0.0, [](double) { return 0.0; }, [](double) { return 0.0; }),
              cell(0.0, kInf, [](double x) { return -2.0 * x; }, [](double) { return -2.0; })};
  a0.breakpoints = {{0.0, 0.0, {-2.0, 0.0}, false, 0.0}};
  Piecewise1D a1;  // 2x 1_{x<=0}
  a1.cells = {cell(-kInf, 0.0, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }),
              cell(0.0, kInf, [](double) { return 0.0; }, [](double) { return 0.0; })};
  a1.breakpoints = {{0.0, 0.0, {0.0, 2.0}, false, 0.0}};
  sf.per_atom_1d = {a0, a1};

  // -relu(2x) and -relu(-2x)
  sf.graphs.push_back(
      CompGraph(1, {affine({0}, {2.0}), unary(OpKind::Relu, 1), affine({2}, {-1.0})}));
  sf.graphs.push_back(
      CompGraph(1, {affine({0}, {-2.0}), unary(OpKind::Relu, 1), affine({2}, {-1.0})}));

  sf.mean = [](const Vec& x) { return -std::fabs(x[0]); };
  sf.mean_grad = [](const Vec& x) -> std::optional<Vec> {
    if (x[0] == 0.0) return std::nullopt;
    return Vec{x[0] > 0.0 ? -1.0 : 1.0};
  };
  sf.mean_clarke = [](const Vec& x) {
    if (x[0] == 0.0) return ConvexGeneratorSet::interval(-1.0, 1.0);
    return ConvexGeneratorSet::singleton({x[0] > 0.0 ? -1.0 : 1.0});
  };
  sf.critical_set = CriticalSet::point({0.0});
  sf.kkt_set = [](double r) {
    CriticalSet z;
    z.elements = {{{-r}, {-r}}, {{0.0}, {0.0}}, {{r}, {r}}};
    return z;
  };
  sf.lipschitz_bound = [](double) { return 2.0; };
  sf.mean_kinks = {0.0};
  sf.analytic_flow = [](const Vec& x0, double t) {
    if (x0[0] == 0.0) return Vec{0.0};  // min-norm selection stalls at 0
    const double sgn = x0[0] > 0.0 ? 1.0 : -1.0;
    return Vec{x0[0] + sgn * t};
  };
  return finalize(std::move(sf));
}

StochasticFunction make_quadratic() {
  StochasticFunction sf;
  sf.name = "quadratic";
  sf.config_text = config_json("quadratic", nlohmann::json::object()).dump();
  sf.dim = 1;
  sf.space = one_atom("noiseless");

  Piecewise1D pw;
  pw.cells = {cell(-kInf, kInf, [](double x) { return 0.5 * x * x; }, [](double x) { return x; })};
  sf.per_atom_1d = {pw};
  sf.graphs.push_back(CompGraph(1, {unary(OpKind::Square, 0), affine({1}, {0.5})}));

  sf.mean = [](const Vec& x) { return 0.5 * x[0] * x[0]; };
  sf.mean_grad = [](const Vec& x) -> std::optional<Vec> { return Vec{x[0]}; };
  sf.mean_clarke = [](const Vec& x) { return ConvexGeneratorSet::singleton({x[0]}); };
  sf.critical_set = CriticalSet::point({0.0});
  sf.kkt_set = [](double) { return CriticalSet::point({0.0}); };
  sf.lipschitz_bound = [](double radius) { return radius; };
  sf.excluded_steps = quadratic_excluded_steps({1.0});
  sf.coercive = true;
  sf.flow_unique = true;
  sf.analytic_flow = [](const Vec& x0, double t) { return Vec{x0[0] * std::exp(-t)}; };
  sf.analytic_flow_proj = [](const Vec& x0, double t, double) {
    return Vec{x0[0] * std::exp(-t)};
  };
  return finalize(std::move(sf));
}

StochasticFunction make_noisy_quadratic(int dim) {
  if (dim < 1) throw ConfigError("noisy-quadratic: dim must be >= 1");
  StochasticFunction sf;
  sf.name = "noisy-quadratic";
  sf.config_text = config_json("noisy-quadratic", {{"dim", dim}}).dump();
  sf.dim = dim;
  sf.space.kind = SampleSpace::Kind::Continuous;
  sf.space.sampler_id = "uniform-box";
  sf.space.sample_dim = dim;
  sf.space.description = "s uniform on [-1,1]^d";
  sf.sampler = [dim](Rng& rng) { return rng.uniform_box(Vec(dim, -1.0), Vec(dim, 1.0)); };
  sf.noise_second_moment = dim / 3.0;  // E||s||^2 for U[-1,1]^d

  sf.eval = [](const Vec& x, const Sample& s) { return 0.5 * sq_norm(x) + dot(s.value, x); };
  sf.is_kink = [](const Vec&, const Sample&) { return false; };
  sf.gradient = [](const Vec& x, const Sample& s) -> std::optional<Vec> { return add(x, s.value); };
  sf.clarke = [](const Vec& x, const Sample& s) {
    return ConvexGeneratorSet::singleton(add(x, s.value));
  };
  sf.kink_ids = [](const Vec&, const Sample&) { return std::vector<int>{}; };

  sf.mean = [](const Vec& x) { return 0.5 * sq_norm(x); };
  sf.mean_grad = [](const Vec& x) -> std::optional<Vec> { return x; };
  sf.mean_clarke = [](const Vec& x) { return ConvexGeneratorSet::singleton(x); };
  sf.critical_set = CriticalSet::point(Vec(dim, 0.0));
  sf.kkt_set = [dim](double) { return CriticalSet::point(Vec(dim, 0.0)); };
  sf.lipschitz_bound = [dim](double radius) { return radius + std::sqrt(double(dim)); };
  sf.coercive = true;
  sf.flow_unique = true;
  sf.analytic_flow = [](const Vec& x0, double t) { return scaled(x0, std::exp(-t)); };
  sf.analytic_flow_proj = [](const Vec& x0, double t, double) {
    return scaled(x0, std::exp(-t));
  };
  return sf;
}

StochasticFunction make_oscillatory() {
  StochasticFunction sf;
  sf.name = "oscillatory";
  sf.config_text = config_json("oscillatory", nlohmann::json::object()).dump();
  sf.dim = 1;
  sf.space = one_atom("deterministic");

  auto g = [](double x) { return x * x * std::sin(1.0 / x); };
  auto dg = [](double x) { return 2.0 * x * std::sin(1.0 / x) - std::cos(1.0 / x); };
  Piecewise1D pw;
  pw.cells = {cell(-kInf, 0.0, g, dg), cell(0.0, kInf, g, dg)};
  // differentiable at 0 with gradient 0, but the Clarke set there is [-1, 1]
  pw.breakpoints = {{0.0, 0.0, {-1.0, 1.0}, true, 0.0}};
  sf.per_atom_1d = {pw};

  sf.mean = [g](const Vec& x) { return x[0] == 0.0 ? 0.0 : g(x[0]); };
  sf.mean_grad = [dg](const Vec& x) -> std::optional<Vec> {
    return Vec{x[0] == 0.0 ? 0.0 : dg(x[0])};
  };
  sf.mean_clarke = [dg](const Vec& x) {
    if (x[0] == 0.0) return ConvexGeneratorSet::interval(-1.0, 1.0);
    return ConvexGeneratorSet::singleton({dg(x[0])});
  };
  sf.lipschitz_bound = [](double radius) { return 2.0 * radius + 1.0; };
  return finalize(std::move(sf));
}

StochasticFunction make_relu_net(const ReluNetParams& p) {
  if (p.input_dim < 1 || p.hidden < 1 || p.n_data < 1)
    throw ConfigError("relu-net: dimensions must be positive");
  StochasticFunction sf;
  sf.name = "relu-net";
  sf.config_text = config_json("relu-net", {{"input_dim", p.input_dim},
                                            {"hidden", p.hidden},
                                            {"n_data", p.n_data},
                                            {"data_seed", p.data_seed}})
                       .dump();
  const int din = p.input_dim, h = p.hidden;
  const int d = h * din + h;  // W1 (h x din) row-major, then w2 (h)
  sf.dim = d;
  sf.space.kind = SampleSpace::Kind::Finite;
  sf.space.weights.assign(p.n_data, 1.0 / p.n_data);
  sf.space.description = "uniform over generated dataset";

  // dataset from a bounded teacher
  Rng rng(derive_seed(p.data_seed, Stream::Scratch));
  Vec teacher = rng.uniform_box(Vec(din, -1.0), Vec(din, 1.0));
  std::vector<Vec> xs;
  Vec ys;
  for (int i = 0; i < p.n_data; ++i) {
    Vec xi = rng.uniform_box(Vec(din, -1.0), Vec(din, 1.0));
    ys.push_back(std::tanh(2.0 * dot(teacher, xi)));
    xs.push_back(std::move(xi));
  }

  // one graph per data point; hidden preactivations are the kink boundaries
  auto pre_node_index = [d, h](int j) { return d + j; };
  for (int a = 0; a < p.n_data; ++a) {
    std::vector<GraphNode> nodes;
    for (int j = 0; j < h; ++j) {
      std::vector<int> parents(din);
      for (int k = 0; k < din; ++k) parents[k] = j * din + k;
      nodes.push_back(affine(parents, xs[a]));  // pre_j at d+j
    }
    for (int j = 0; j < h; ++j) nodes.push_back(unary(OpKind::Relu, d + j));  // act_j at d+h+j
    for (int j = 0; j < h; ++j) {
      GraphNode m;
      m.kind = OpKind::Mul;
      m.parents = {h * din + j, d + h + j};  // w2_j * act_j at d+2h+j
      nodes.push_back(m);
    }
    std::vector<int> sum_parents(h);
    for (int j = 0; j < h; ++j) sum_parents[j] = d + 2 * h + j;
    nodes.push_back(affine(sum_parents, Vec(h, 1.0)));        // out at d+3h
    nodes.push_back(affine({d + 3 * h}, {1.0}, -ys[a]));      // residual
    nodes.push_back(unary(OpKind::Square, d + 3 * h + 1));
    nodes.push_back(affine({d + 3 * h + 2}, {0.5}));          // loss
    sf.graphs.push_back(CompGraph(d, std::move(nodes)));
  }

  auto graphs = std::make_shared<std::vector<CompGraph>>(sf.graphs);
  auto zero_pres = [graphs, h, pre_node_index](const Vec& x, int atom) {
    Vec vals;
    (*graphs)[atom].forward(x, &vals);
    std::vector<int> zs;
    for (int j = 0; j < h; ++j)
      if (vals[pre_node_index(j)] == 0.0) zs.push_back(j);
    return zs;
  };

  sf.eval = [graphs](const Vec& x, const Sample& s) { return (*graphs)[s.atom].forward(x); };
  sf.is_kink = [zero_pres](const Vec& x, const Sample& s) { return !zero_pres(x, s.atom).empty(); };
  sf.kink_ids = [zero_pres](const Vec& x, const Sample& s) { return zero_pres(x, s.atom); };
  sf.gradient = [graphs, zero_pres](const Vec& x, const Sample& s) -> std::optional<Vec> {
    if (!zero_pres(x, s.atom).empty()) return std::nullopt;
    return (*graphs)[s.atom].backprop(x);
  };
  sf.clarke = [graphs, zero_pres, pre_node_index, h](const Vec& x, const Sample& s) {
    const auto zs = zero_pres(x, s.atom);
    if (zs.empty()) return ConvexGeneratorSet::singleton((*graphs)[s.atom].backprop(x));
    if (zs.size() > 16) throw ProblemError("relu-net: too many simultaneous kinks");
    std::vector<Vec> gens;
    for (std::size_t mask = 0; mask < (1u << zs.size()); ++mask) {
      std::map<int, double> ov;
      for (std::size_t b = 0; b < zs.size(); ++b)
        ov[pre_node_index(zs[b]) + h] = (mask >> b) & 1 ? 1.0 : 0.0;  // relu node = pre node + h
      gens.push_back((*graphs)[s.atom].backprop(x, &ov));
    }
    return ConvexGeneratorSet(std::move(gens), static_cast<int>(x.size()));
  };

  // exact finite-sum oracles
  auto weights = sf.space.weights;
  sf.mean = [graphs, weights](const Vec& x) {
    double v = 0.0;
    for (std::size_t a = 0; a < graphs->size(); ++a) v += weights[a] * (*graphs)[a].forward(x);
    return v;
  };
  sf.mean_grad = [graphs, weights, zero_pres](const Vec& x) -> std::optional<Vec> {
    Vec g(x.size(), 0.0);
    for (std::size_t a = 0; a < graphs->size(); ++a) {
      if (!zero_pres(x, static_cast<int>(a)).empty()) return std::nullopt;
      axpy(weights[a], (*graphs)[a].backprop(x), g);
    }
    return g;
  };

  double data_norm = 1.0;
  for (const auto& xi : xs) data_norm = std::max(data_norm, norm(xi));
  sf.lipschitz_bound = [data_norm, h](double radius) {
    // crude: loss is piecewise polynomial of degree 4 in the weights
    const double r = 1.0 + radius;
    return 4.0 * h * data_norm * data_norm * r * r * r;
  };
  return sf;
}

StochasticFunction make_builtin(const std::string& id, const nlohmann::json& params) {
  if (id == "example51") return make_example51();
  if (id == "abs") return make_abs();
  if (id == "neg-abs") return make_neg_abs();
  if (id == "quadratic") return make_quadratic();
  if (id == "noisy-quadratic") return make_noisy_quadratic(params.value("dim", 1));
  if (id == "oscillatory") return make_oscillatory();
  if (id == "relu-net") {
    ReluNetParams p;
    p.input_dim = params.value("input_dim", p.input_dim);
    p.hidden = params.value("hidden", p.hidden);
    p.n_data = params.value("n_data", p.n_data);
    p.data_seed = params.value("data_seed", p.data_seed);
    return make_relu_net(p);
  }
  throw ConfigError("unknown builtin problem: " + id);
}

StochasticFunction make_builtin_from_config(const std::string& config_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("problem config parse error: ") + e.what());
  }
  return make_builtin(j.at("problem").get<std::string>(),
                      j.value("params", nlohmann::json::object()));
}

std::vector<std::string> builtin_ids() {
  return {"example51", "abs", "neg-abs", "quadratic", "noisy-quadratic", "oscillatory", "relu-net"};
}

}  // namespace sgdlab
