#ifndef SGDLAB_GRAPH_HPP_
#define SGDLAB_GRAPH_HPP_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sgdlab/linalg.hpp"

namespace sgdlab {

/// Primitive kinds for computation-graph nodes. Each nonsmooth primitive
/// carries a derivative convention at its kinks (relu'(0), abs'(0), max2
/// ties); the convention value must lie in the primitive's Clarke interval.
enum class OpKind { Input, Const, Affine, Relu, Abs, Max2, Square, Mul };

std::string op_kind_name(OpKind k);
OpKind op_kind_from_name(const std::string& name);

struct GraphNode {
  OpKind kind = OpKind::Input;
  std::vector<int> parents;  // indices strictly smaller than this node's index
  Vec weights;               // Affine: one weight per parent
  double bias = 0.0;         // Affine
  double cval = 0.0;         // Const
};

/// Derivative conventions reported at nondifferentiable points.
struct KinkConventions {
  double relu_at_zero = 0.0;  // must lie in [0, 1]
  double abs_at_zero = 0.0;   // must lie in [-1, 1]
  bool max2_tie_first = true;
};

/// A scalar-output computation DAG over path-differentiable primitives.
/// Nodes 0..d-1 are the inputs; remaining nodes are in topological order and
/// the last node is the output.
class CompGraph {
 public:
  CompGraph(int input_dim, std::vector<GraphNode> nodes, KinkConventions conv = {});

  int input_dim() const { return input_dim_; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const KinkConventions& conventions() const { return conv_; }

  /// Forward pass; optionally exposes all node values.
  double forward(const Vec& x, Vec* node_values = nullptr) const;

  /// Reverse-mode accumulation of per-primitive derivative selections.
  /// kink_override maps a node index to the derivative value to report when
  /// that node sits exactly at its kink (used to enumerate Clarke corners).
  Vec backprop(const Vec& x, const std::map<int, double>* kink_override = nullptr) const;

  /// Indices of nonsmooth nodes whose argument sits exactly at a kink for
  /// input x (relu/abs argument 0, max2 tie).
  std::vector<int> kink_nodes(const Vec& x) const;

  /// Parameter values of 1D "kink crossings" of a straight segment
  /// x(t) = a + t (b - a), t in (0, 1): times where some nonsmooth node
  /// changes regime. Found by dense sampling plus bisection of sign changes.
  std::vector<double> kink_times(const Vec& a, const Vec& b) const;

  std::string serialize() const;
  static CompGraph deserialize(const std::string& text);

 private:
  int input_dim_;
  std::vector<GraphNode> nodes_;
  KinkConventions conv_;
};

/// Residual |h(a(1)) - h(a(0)) - \int_0^1 <v(a(t)), a'(t)> dt| of the
/// conservative-field identity along a piecewise-linear path. The integral
/// uses per-segment Gauss-Legendre quadrature after splitting each segment at
/// kink crossings.
double path_integral_check(const std::function<double(const Vec&)>& value,
                           const std::function<Vec(const Vec&)>& selection,
                           const std::function<std::vector<double>(const Vec&, const Vec&)>& kink_times,
                           const std::vector<Vec>& path_breakpoints, int quad_order = 16);

/// Convenience overload driving value/selection/kinks from a graph.
double path_integral_check(const CompGraph& g, const std::vector<Vec>& path_breakpoints,
                           int quad_order = 16);

}  // namespace sgdlab

#endif  // SGDLAB_GRAPH_HPP_
