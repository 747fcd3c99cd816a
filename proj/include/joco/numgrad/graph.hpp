#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "joco/numgrad/param_set.hpp"
#include "joco/numgrad/tensor.hpp"

namespace joco::ng {

/// Handle to a node in a Graph.
struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

/// Reverse-mode differentiation over a closed set of dense primitives:
/// elementwise add/sub/mul/scale, broadcasts of a scalar or a row vector over
/// the leading axis, matmul, tanh/relu/exp/log, sum, pairwise squared
/// distance, diagonal get/add, column slice, Cholesky factorization and lower
/// triangular solve.
///
/// Nodes are appended in construction order, which is a topological order, so
/// backward is a single reverse sweep. Every forward result is checked for
/// finiteness; a NaN or Inf throws NumericalError "numerical overflow in
/// graph". One Graph instance must not be shared between threads.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var scalar(double v) { return constant(Tensor::scalar(v)); }

  /// Leaf bound to a ParamSet entry; backward() accumulates its gradient into
  /// the entry. Binding the same entry twice returns the same Var.
  Var param(ParamSet& params, std::string_view name);
  Var param(ParamSet& params, std::size_t index);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  /// Gradient of the last backward() root with respect to `v` (zeros if `v`
  /// did not influence the root).
  const Tensor& grad(Var v);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double c);
  /// a + s with scalar s broadcast to every element.
  Var add_scalar(Var a, Var s);
  /// m (n x k) + v (k) broadcast over rows.
  Var add_rows(Var m, Var v);
  /// m (n x k) * v (k) broadcast over rows.
  Var mul_rows(Var m, Var v);
  /// (n x k) x (k x m) or (n x k) x (k).
  Var matmul(Var a, Var b);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var sum(Var a);
  /// D[i, j] = ||a_i - b_j||^2 over rows of a (n x p) and b (q x p).
  Var sqdist(Var a, Var b);
  /// m + s * I for scalar s.
  Var add_diag(Var m, Var s);
  Var diag(Var m);
  Var column(Var m, std::size_t j);
  /// Lower Cholesky factor with the jitter policy of ng::cholesky(); the
  /// jitter is treated as a constant.
  Var cholesky(Var a);
  /// X with L X = b for lower-triangular L and b of shape (n) or (n x r).
  Var solve_lower(Var l, Var b);

  /// Jitter used by a cholesky() node.
  double jitter(Var chol) const { return nodes_.at(chol.id).aux; }

  /// Seeds d(root) = 1 for a scalar root, sweeps backward, and adds parameter
  /// gradients into their ParamSet entries.
  void backward(Var root);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  using Backward = std::function<void(Graph&, const Tensor&)>;

  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    double aux = 0.0;
    Backward backward;
    ParamSet* params = nullptr;
    std::size_t param_index = 0;
  };

  Var push(Tensor value, bool requires_grad, Backward backward);
  bool needs(Var v) const { return nodes_[v.id].requires_grad; }
  Tensor& grad_slot(Var v);
  void accumulate(Var v, const Tensor& g);

  std::vector<Node> nodes_;
};

/// Builds the expression with `build`, runs backward, and returns the value.
/// Gradients land in `params` (zeroed first); unused parameters get zero.
double value_and_grad(ParamSet& params,
                      const std::function<Var(Graph&)>& build);

}  // namespace joco::ng
