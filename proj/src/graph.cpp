#include "sgdlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sgdlab/errors.hpp"

namespace sgdlab {

std::string op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::Input: return "input";
    case OpKind::Const: return "const";
    case OpKind::Affine: return "affine";
    case OpKind::Relu: return "relu";
    case OpKind::Abs: return "abs";
    case OpKind::Max2: return "max2";
    case OpKind::Square: return "square";
    case OpKind::Mul: return "mul";
  }
  return "?";
}

OpKind op_kind_from_name(const std::string& name) {
  if (name == "input") return OpKind::Input;
  if (name == "const") return OpKind::Const;
  if (name == "affine") return OpKind::Affine;
  if (name == "relu") return OpKind::Relu;
  if (name == "abs") return OpKind::Abs;
  if (name == "max2") return OpKind::Max2;
  if (name == "square") return OpKind::Square;
  if (name == "mul") return OpKind::Mul;
  throw ConfigError("unknown primitive kind: " + name);
}

namespace {

int expected_arity(OpKind k) {
  switch (k) {
    case OpKind::Input:
    case OpKind::Const: return 0;
    case OpKind::Affine: return -1;  // any
    case OpKind::Relu:
    case OpKind::Abs:
    case OpKind::Square: return 1;
    case OpKind::Max2:
    case OpKind::Mul: return 2;
  }
  return -1;
}

}  // namespace

CompGraph::CompGraph(int input_dim, std::vector<GraphNode> nodes, KinkConventions conv)
    : input_dim_(input_dim), nodes_(std::move(nodes)), conv_(conv) {
  if (conv_.relu_at_zero < 0.0 || conv_.relu_at_zero > 1.0)
    throw ConfigError("relu kink convention outside [0,1]");
  if (conv_.abs_at_zero < -1.0 || conv_.abs_at_zero > 1.0)
    throw ConfigError("abs kink convention outside [-1,1]");
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    const GraphNode& n = nodes_[i];
    const int node_index = input_dim_ + i;
    for (int p : n.parents)
      if (p < 0 || p >= node_index)
        throw ConfigError("graph is not in topological order");
    const int arity = expected_arity(n.kind);
    if (arity >= 0 && static_cast<int>(n.parents.size()) != arity)
      throw ConfigError("arity mismatch for " + op_kind_name(n.kind));
    if (n.kind == OpKind::Affine && n.weights.size() != n.parents.size())
      throw ConfigError("affine weights/parents mismatch");
  }
  if (nodes_.empty()) throw ConfigError("graph has no output node");
}

double CompGraph::forward(const Vec& x, Vec* node_values) const {
  if (static_cast<int>(x.size()) != input_dim_)
    throw ConfigError("forward: input dimension mismatch");
  Vec local;
  Vec& vals = node_values ? *node_values : local;
  vals.assign(input_dim_ + nodes_.size(), 0.0);
  std::copy(x.begin(), x.end(), vals.begin());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const GraphNode& n = nodes_[i];
    double v = 0.0;
    switch (n.kind) {
      case OpKind::Input: throw ConfigError("explicit input node not allowed");
      case OpKind::Const: v = n.cval; break;
      case OpKind::Affine: {
        v = n.bias;
        for (std::size_t j = 0; j < n.parents.size(); ++j) v += n.weights[j] * vals[n.parents[j]];
        break;
      }
      case OpKind::Relu: v = std::max(vals[n.parents[0]], 0.0); break;
      case OpKind::Abs: v = std::fabs(vals[n.parents[0]]); break;
      case OpKind::Max2: v = std::max(vals[n.parents[0]], vals[n.parents[1]]); break;
      case OpKind::Square: {
        const double u = vals[n.parents[0]];
        v = u * u;
        break;
      }
      case OpKind::Mul: v = vals[n.parents[0]] * vals[n.parents[1]]; break;
    }
    vals[input_dim_ + i] = v;
  }
  return vals.back();
}

Vec CompGraph::backprop(const Vec& x, const std::map<int, double>* kink_override) const {
  Vec vals;
  forward(x, &vals);
  Vec adj(vals.size(), 0.0);
  adj.back() = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    const GraphNode& n = nodes_[i];
    const int idx = input_dim_ + i;
    const double a = adj[idx];
    if (a == 0.0) continue;
    switch (n.kind) {
      case OpKind::Input:
      case OpKind::Const: break;
      case OpKind::Affine:
        for (std::size_t j = 0; j < n.parents.size(); ++j) adj[n.parents[j]] += a * n.weights[j];
        break;
      case OpKind::Relu: {
        const double u = vals[n.parents[0]];
        double d;
        if (u > 0.0)
          d = 1.0;
        else if (u < 0.0)
          d = 0.0;
        else {
          d = conv_.relu_at_zero;
          if (kink_override) {
            auto it = kink_override->find(idx);
            if (it != kink_override->end()) d = it->second;
          }
        }
        adj[n.parents[0]] += a * d;
        break;
      }
      case OpKind::Abs: {
        const double u = vals[n.parents[0]];
        double d;
        if (u > 0.0)
          d = 1.0;
        else if (u < 0.0)
          d = -1.0;
        else {
          d = conv_.abs_at_zero;
          if (kink_override) {
            auto it = kink_override->find(idx);
            if (it != kink_override->end()) d = it->second;
          }
        }
        adj[n.parents[0]] += a * d;
        break;
      }
      case OpKind::Max2: {
        const double u = vals[n.parents[0]];
        const double v = vals[n.parents[1]];
        if (u > v)
          adj[n.parents[0]] += a;
        else if (v > u)
          adj[n.parents[1]] += a;
        else {
          // tie
          double t_first = conv_.max2_tie_first ? 1.0 : 0.0;
          if (kink_override) {
            auto it = kink_override->find(idx);
            if (it != kink_override->end()) t_first = it->second;
          }
          adj[n.parents[0]] += a * t_first;
          adj[n.parents[1]] += a * (1.0 - t_first);
        }
        break;
      }
      case OpKind::Square:
        adj[n.parents[0]] += a * 2.0 * vals[n.parents[0]];
        break;
      case OpKind::Mul:
        adj[n.parents[0]] += a * vals[n.parents[1]];
        adj[n.parents[1]] += a * vals[n.parents[0]];
        break;
    }
  }
  return Vec(adj.begin(), adj.begin() + input_dim_);
}

std::vector<int> CompGraph::kink_nodes(const Vec& x) const {
  Vec vals;
  forward(x, &vals);
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const GraphNode& n = nodes_[i];
    const int idx = input_dim_ + static_cast<int>(i);
    if ((n.kind == OpKind::Relu || n.kind == OpKind::Abs) && vals[n.parents[0]] == 0.0)
      out.push_back(idx);
    if (n.kind == OpKind::Max2 && vals[n.parents[0]] == vals[n.parents[1]]) out.push_back(idx);
  }
  return out;
}

std::vector<double> CompGraph::kink_times(const Vec& a, const Vec& b) const {
  // For each nonsmooth node, track the sign of its "boundary function"
  // (relu/abs argument, or first-minus-second for max2) along the segment.
  std::vector<std::pair<OpKind, int>> watch;  // (kind, node offset)
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const OpKind k = nodes_[i].kind;
    if (k == OpKind::Relu || k == OpKind::Abs || k == OpKind::Max2)
      watch.emplace_back(k, static_cast<int>(i));
  }
  if (watch.empty()) return {};

  auto boundary_values = [&](double t, Vec& out) {
    Vec x(a.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] + t * (b[i] - a[i]);
    Vec vals;
    forward(x, &vals);
    out.resize(watch.size());
    for (std::size_t w = 0; w < watch.size(); ++w) {
      const GraphNode& n = nodes_[watch[w].second];
      if (watch[w].first == OpKind::Max2)
        out[w] = vals[n.parents[0]] - vals[n.parents[1]];
      else
        out[w] = vals[n.parents[0]];
    }
  };

  const int samples = 256;
  std::vector<double> times;
  Vec prev, cur;
  boundary_values(0.0, prev);
  for (int k = 1; k <= samples; ++k) {
    const double t1 = static_cast<double>(k) / samples;
    boundary_values(t1, cur);
    for (std::size_t w = 0; w < watch.size(); ++w) {
      if ((prev[w] < 0.0 && cur[w] > 0.0) || (prev[w] > 0.0 && cur[w] < 0.0)) {
        double lo = static_cast<double>(k - 1) / samples, hi = t1;
        double flo = prev[w];
        Vec tmp;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          boundary_values(mid, tmp);
          if ((tmp[w] < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = tmp[w];
          } else {
            hi = mid;
          }
        }
        times.push_back(0.5 * (lo + hi));
      } else if (cur[w] == 0.0) {
        times.push_back(t1);
      }
    }
    prev = cur;
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double u, double v) { return std::fabs(u - v) < 1e-12; }),
              times.end());
  return times;
}

std::string CompGraph::serialize() const {
  nlohmann::json j;
  j["input_dim"] = input_dim_;
  j["conventions"] = {{"relu_at_zero", conv_.relu_at_zero},
                      {"abs_at_zero", conv_.abs_at_zero},
                      {"max2_tie_first", conv_.max2_tie_first}};
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nlohmann::json jn;
    jn["op"] = op_kind_name(n.kind);
    jn["parents"] = n.parents;
    if (n.kind == OpKind::Affine) {
      jn["weights"] = n.weights;
      jn["bias"] = n.bias;
    }
    if (n.kind == OpKind::Const) jn["value"] = n.cval;
    nodes.push_back(jn);
  }
  j["nodes"] = nodes;
  return j.dump(2);
}

CompGraph CompGraph::deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("graph parse error: ") + e.what());
  }
  KinkConventions conv;
  if (j.contains("conventions")) {
    const auto& c = j["conventions"];
    conv.relu_at_zero = c.value("relu_at_zero", 0.0);
    conv.abs_at_zero = c.value("abs_at_zero", 0.0);
    conv.max2_tie_first = c.value("max2_tie_first", true);
  }
  std::vector<GraphNode> nodes;
  for (const auto& jn : j.at("nodes")) {
    GraphNode n;
    n.kind = op_kind_from_name(jn.at("op").get<std::string>());
    n.parents = jn.value("parents", std::vector<int>{});
    if (n.kind == OpKind::Affine) {
      n.weights = jn.at("weights").get<Vec>();
      n.bias = jn.value("bias", 0.0);
    }
    if (n.kind == OpKind::Const) n.cval = jn.at("value").get<double>();
    nodes.push_back(std::move(n));
  }
  return CompGraph(j.at("input_dim").get<int>(), std::move(nodes), conv);
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(order);
  weights.resize(order);
  // Newton iteration on Legendre polynomials; standard construction.
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    weights[order - 1 - i] = weights[i];
  }
}

}  // namespace

double path_integral_check(const std::function<double(const Vec&)>& value,
                           const std::function<Vec(const Vec&)>& selection,
                           const std::function<std::vector<double>(const Vec&, const Vec&)>& kink_times,
                           const std::vector<Vec>& path, int quad_order) {
  if (path.size() < 2) throw ConfigError("path needs at least two breakpoints");
  std::vector<double> qn, qw;
  gauss_legendre(quad_order, qn, qw);

  double integral = 0.0;
  for (std::size_t seg = 0; seg + 1 < path.size(); ++seg) {
    const Vec& a = path[seg];
    const Vec& b = path[seg + 1];
    const Vec vel = sub(b, a);
    std::vector<double> splits{0.0, 1.0};
    if (kink_times)
      for (double t : kink_times(a, b))
        if (t > 0.0 && t < 1.0) splits.push_back(t);
    std::sort(splits.begin(), splits.end());
    for (std::size_t k = 0; k + 1 < splits.size(); ++k) {
      const double t0 = splits[k], t1 = splits[k + 1];
      const double half = 0.5 * (t1 - t0), mid = 0.5 * (t0 + t1);
      if (half <= 0.0) continue;
      for (int q = 0; q < quad_order; ++q) {
        const double t = mid + half * qn[q];
        Vec x(a.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] + t * vel[i];
        integral += half * qw[q] * dot(selection(x), vel);
      }
    }
  }
  const double delta = value(path.back()) - value(path.front());
  return std::fabs(delta - integral);
}

double path_integral_check(const CompGraph& g, const std::vector<Vec>& path, int quad_order) {
  return path_integral_check([&](const Vec& x) { return g.forward(x); },
                             [&](const Vec& x) { return g.backprop(x); },
                             [&](const Vec& a, const Vec& b) { return g.kink_times(a, b); }, path,
                             quad_order);
}

}  // namespace sgdlab
