#include "joco/numgrad/graph.hpp"

#include <cmath>
#include <string>

#include "joco/numgrad/linalg.hpp"
#include "joco/simd/kernels.hpp"
#include "joco/util/error.hpp"

namespace joco::ng {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

void require_scalar(const Tensor& s, const char* op) {
  if (!s.is_scalar()) {
    throw ShapeError(std::string(op) + ": expected a scalar, got " +
                     shape_string(s.shape()));
  }
}

Tensor lower_part(Tensor m) {
  const std::size_t n = m.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = 0.0;
  return m;
}

}  // namespace

Var Graph::push(Tensor value, bool requires_grad, Backward backward) {
  if (!value.all_finite()) throw NumericalError("numerical overflow in graph");
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor& Graph::grad_slot(Var v) {
  Node& n = nodes_[v.id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape());
    n.has_grad = true;
  }
  return n.grad;
}

void Graph::accumulate(Var v, const Tensor& g) {
  if (!needs(v)) return;
  Tensor& slot = grad_slot(v);
  auto dst = slot.values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

const Tensor& Graph::grad(Var v) { return grad_slot(v); }

Var Graph::constant(Tensor value) { return push(std::move(value), false, {}); }

Var Graph::param(ParamSet& params, std::string_view name) {
  return param(params, params.index_of(name));
}

Var Graph::param(ParamSet& params, std::size_t index) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].params == &params && nodes_[i].param_index == index) {
      return Var{static_cast<std::uint32_t>(i)};
    }
  }
  Var v = push(params.at(index).value, true, [](Graph&, const Tensor&) {});
  nodes_[v.id].params = &params;
  nodes_[v.id].param_index = index;
  return v;
}

Var Graph::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Tensor out = value(a);
  auto o = out.values();
  auto bv = value(b).values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return push(std::move(out), needs(a) || needs(b),
              [a, b](Graph& g, const Tensor& up) {
                g.accumulate(a, up);
                g.accumulate(b, up);
              });
}

Var Graph::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Tensor out = value(a);
  auto o = out.values();
  auto bv = value(b).values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return push(std::move(out), needs(a) || needs(b),
              [a, b](Graph& g, const Tensor& up) {
                g.accumulate(a, up);
                if (!g.needs(b)) return;
                Tensor neg = up;
                for (double& x : neg.values()) x = -x;
                g.accumulate(b, neg);
              });
}

Var Graph::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  Tensor out = value(a);
  auto o = out.values();
  auto bv = value(b).values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return push(std::move(out), needs(a) || needs(b),
              [a, b](Graph& g, const Tensor& up) {
                auto u = up.values();
                if (g.needs(a)) {
                  Tensor ga = g.value(b);
                  auto x = ga.values();
                  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= u[i];
                  g.accumulate(a, ga);
                }
                if (g.needs(b)) {
                  Tensor gb = g.value(a);
                  auto x = gb.values();
                  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= u[i];
                  g.accumulate(b, gb);
                }
              });
}

Var Graph::scale(Var a, double c) {
  Tensor out = value(a);
  for (double& x : out.values()) x *= c;
  return push(std::move(out), needs(a), [a, c](Graph& g, const Tensor& up) {
    Tensor ga = up;
    for (double& x : ga.values()) x *= c;
    g.accumulate(a, ga);
  });
}

Var Graph::add_scalar(Var a, Var s) {
  require_scalar(value(s), "add_scalar");
  Tensor out = value(a);
  const double sv = value(s).item();
  for (double& x : out.values()) x += sv;
  return push(std::move(out), needs(a) || needs(s),
              [a, s](Graph& g, const Tensor& up) {
                g.accumulate(a, up);
                if (g.needs(s)) {
                  double total = 0.0;
                  for (double x : up.values()) total += x;
                  g.accumulate(s, Tensor::scalar(total));
                }
              });
}

Var Graph::add_rows(Var m, Var v) {
  const Tensor& mv = value(m);
  const Tensor& vv = value(v);
  if (!mv.is_matrix() || !vv.is_vector() || vv.size() != mv.cols()) {
    throw ShapeError("add_rows: expected (n x k) and (k), got " +
                     shape_string(mv.shape()) + " and " +
                     shape_string(vv.shape()));
  }
  Tensor out = mv;
  const std::size_t rows = mv.rows(), cols = mv.cols();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) += vv[j];
  return push(std::move(out), needs(m) || needs(v),
              [m, v, rows, cols](Graph& g, const Tensor& up) {
                g.accumulate(m, up);
                if (g.needs(v)) {
                  Tensor gv(Shape{cols});
                  for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) gv[j] += up(i, j);
                  g.accumulate(v, gv);
                }
              });
}

Var Graph::mul_rows(Var m, Var v) {
  const Tensor& mv = value(m);
  const Tensor& vv = value(v);
  if (!mv.is_matrix() || !vv.is_vector() || vv.size() != mv.cols()) {
    throw ShapeError("mul_rows: expected (n x k) and (k), got " +
                     shape_string(mv.shape()) + " and " +
                     shape_string(vv.shape()));
  }
  Tensor out = mv;
  const std::size_t rows = mv.rows(), cols = mv.cols();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) *= vv[j];
  return push(std::move(out), needs(m) || needs(v),
              [m, v, rows, cols](Graph& g, const Tensor& up) {
                const Tensor& mval = g.value(m);
                const Tensor& vval = g.value(v);
                if (g.needs(m)) {
                  Tensor gm = up;
                  for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) gm(i, j) *= vval[j];
                  g.accumulate(m, gm);
                }
                if (g.needs(v)) {
                  Tensor gv(Shape{cols});
                  for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j)
                      gv[j] += up(i, j) * mval(i, j);
                  g.accumulate(v, gv);
                }
              });
}

Var Graph::matmul(Var a, Var b) {
  Tensor out = ng::matmul(value(a), value(b));
  return push(std::move(out), needs(a) || needs(b),
              [a, b](Graph& g, const Tensor& up) {
                const Tensor& av = g.value(a);
                const Tensor& bv = g.value(b);
                if (bv.is_vector()) {
                  if (g.needs(a)) {
                    Tensor ga(av.shape());
                    for (std::size_t i = 0; i < av.rows(); ++i)
                      for (std::size_t k = 0; k < av.cols(); ++k)
                        ga(i, k) = up[i] * bv[k];
                    g.accumulate(a, ga);
                  }
                  if (g.needs(b)) g.accumulate(b, ng::matmul(transpose(av), up));
                  return;
                }
                if (g.needs(a)) g.accumulate(a, matmul_nt(up, bv));
                if (g.needs(b)) g.accumulate(b, ng::matmul(transpose(av), up));
              });
}

Var Graph::tanh(Var a) {
  Tensor out = value(a);
  for (double& x : out.values()) x = std::tanh(x);
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(a), [a, self](Graph& g, const Tensor& up) {
    Tensor ga = up;
    auto y = g.value(self).values();
    auto x = ga.values();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= 1.0 - y[i] * y[i];
    g.accumulate(a, ga);
  });
}

Var Graph::relu(Var a) {
  Tensor out = value(a);
  for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
  return push(std::move(out), needs(a), [a](Graph& g, const Tensor& up) {
    Tensor ga = up;
    auto in = g.value(a).values();
    auto x = ga.values();
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(in[i] > 0.0)) x[i] = 0.0;
    g.accumulate(a, ga);
  });
}

Var Graph::exp(Var a) {
  Tensor out = value(a);
  for (double& x : out.values()) x = std::exp(x);
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(out), needs(a), [a, self](Graph& g, const Tensor& up) {
    Tensor ga = up;
    auto y = g.value(self).values();
    auto x = ga.values();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= y[i];
    g.accumulate(a, ga);
  });
}

Var Graph::log(Var a) {
  Tensor out = value(a);
  for (double& x : out.values()) x = std::log(x);
  return push(std::move(out), needs(a), [a](Graph& g, const Tensor& up) {
    Tensor ga = up;
    auto in = g.value(a).values();
    auto x = ga.values();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] /= in[i];
    g.accumulate(a, ga);
  });
}

Var Graph::sum(Var a) {
  double total = 0.0;
  for (double x : value(a).values()) total += x;
  return push(Tensor::scalar(total), needs(a),
              [a](Graph& g, const Tensor& up) {
                Tensor ga(g.value(a).shape(), up.item());
                g.accumulate(a, ga);
              });
}

Var Graph::sqdist(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.is_matrix() || !bv.is_matrix() || av.cols() != bv.cols()) {
    throw ShapeError("sqdist: expected (n x p) and (q x p), got " +
                     shape_string(av.shape()) + " and " +
                     shape_string(bv.shape()));
  }
  const std::size_t n = av.rows(), q = bv.rows(), p = av.cols();
  Tensor out(Shape{n, q});
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = av.row(i);
    for (std::size_t j = 0; j < q; ++j) {
      const double* bj = bv.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        const double d = ai[k] - bj[k];
        s += d * d;
      }
      out(i, j) = s;
    }
  }
  return push(std::move(out), needs(a) || needs(b),
              [a, b, n, q, p](Graph& g, const Tensor& up) {
                const Tensor& av = g.value(a);
                const Tensor& bv = g.value(b);
                Tensor ga(Shape{n, p});
                Tensor gb(Shape{q, p});
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t j = 0; j < q; ++j) {
                    const double w = 2.0 * up(i, j);
                    if (w == 0.0) continue;
                    for (std::size_t k = 0; k < p; ++k) {
                      const double d = av(i, k) - bv(j, k);
                      ga(i, k) += w * d;
                      gb(j, k) -= w * d;
                    }
                  }
                }
                g.accumulate(a, ga);
                g.accumulate(b, gb);
              });
}

Var Graph::add_diag(Var m, Var s) {
  const Tensor& mv = value(m);
  require_scalar(value(s), "add_diag");
  if (!mv.is_matrix() || mv.rows() != mv.cols()) {
    throw ShapeError("add_diag: expected a square matrix");
  }
  Tensor out = mv;
  const double sv = value(s).item();
  const std::size_t n = mv.rows();
  for (std::size_t i = 0; i < n; ++i) out(i, i) += sv;
  return push(std::move(out), needs(m) || needs(s),
              [m, s, n](Graph& g, const Tensor& up) {
                g.accumulate(m, up);
                if (g.needs(s)) {
                  double tr = 0.0;
                  for (std::size_t i = 0; i < n; ++i) tr += up(i, i);
                  g.accumulate(s, Tensor::scalar(tr));
                }
              });
}

Var Graph::diag(Var m) {
  const Tensor& mv = value(m);
  if (!mv.is_matrix() || mv.rows() != mv.cols()) {
    throw ShapeError("diag: expected a square matrix");
  }
  const std::size_t n = mv.rows();
  Tensor out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) out[i] = mv(i, i);
  return push(std::move(out), needs(m), [m, n](Graph& g, const Tensor& up) {
    Tensor gm(Shape{n, n});
    for (std::size_t i = 0; i < n; ++i) gm(i, i) = up[i];
    g.accumulate(m, gm);
  });
}

Var Graph::column(Var m, std::size_t j) {
  const Tensor& mv = value(m);
  if (!mv.is_matrix() || j >= mv.cols()) {
    throw ShapeError("column: index out of range");
  }
  const std::size_t n = mv.rows();
  Tensor out(Shape{n});
  for (std::size_t i = 0; i < n; ++i) out[i] = mv(i, j);
  return push(std::move(out), needs(m), [m, j, n](Graph& g, const Tensor& up) {
    Tensor gm(g.value(m).shape());
    for (std::size_t i = 0; i < n; ++i) gm(i, j) = up[i];
    g.accumulate(m, gm);
  });
}

Var Graph::cholesky(Var a) {
  CholeskyResult chol = ng::cholesky(value(a));
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  Var out = push(std::move(chol.lower), needs(a),
                 [a, self](Graph& g, const Tensor& up) {
                   // Abar = sym(L^-T Phi(L^T Lbar) L^-1), Phi = lower part
                   // with the diagonal halved.
                   const Tensor& l = g.value(self);
                   const std::size_t n = l.rows();
                   Tensor phi = ng::matmul(transpose(l), lower_part(up));
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t j = i + 1; j < n; ++j) phi(i, j) = 0.0;
                     phi(i, i) *= 0.5;
                   }
                   Tensor x = solve_lower_transposed(l, phi);
                   Tensor s = transpose(solve_lower_transposed(l, transpose(x)));
                   Tensor ga(Shape{n, n});
                   for (std::size_t i = 0; i < n; ++i)
                     for (std::size_t j = 0; j < n; ++j)
                       ga(i, j) = 0.5 * (s(i, j) + s(j, i));
                   g.accumulate(a, ga);
                 });
  nodes_[out.id].aux = chol.jitter;
  return out;
}

Var Graph::solve_lower(Var l, Var b) {
  const Tensor& lv = value(l);
  const Tensor& bv = value(b);
  if (!lv.is_matrix() || lv.rows() != lv.cols() || bv.rows() != lv.rows()) {
    throw ShapeError("solve_lower: incompatible shapes " +
                     shape_string(lv.shape()) + " and " +
                     shape_string(bv.shape()));
  }
  Tensor x = ng::solve_lower(lv, bv);
  const Var self{static_cast<std::uint32_t>(nodes_.size())};
  return push(std::move(x), needs(l) || needs(b),
              [l, b, self](Graph& g, const Tensor& up) {
                const Tensor& lv = g.value(l);
                const Tensor& xv = g.value(self);
                Tensor gb = solve_lower_transposed(lv, up);
                if (g.needs(l)) {
                  const std::size_t n = lv.rows();
                  Tensor gl(Shape{n, n});
                  if (xv.is_vector()) {
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j <= i; ++j)
                        gl(i, j) = -gb[i] * xv[j];
                  } else {
                    Tensor prod = matmul_nt(gb, xv);
                    for (std::size_t i = 0; i < n; ++i)
                      for (std::size_t j = 0; j <= i; ++j) gl(i, j) = -prod(i, j);
                  }
                  g.accumulate(l, gl);
                }
                g.accumulate(b, gb);
              });
}

void Graph::backward(Var root) {
  if (!value(root).is_scalar()) {
    throw ShapeError("backward: root must be a scalar");
  }
  for (auto& n : nodes_) n.has_grad = false;
  grad_slot(root)[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.requires_grad) continue;
    if (!n.grad.all_finite()) throw NumericalError("numerical overflow in graph");
    if (n.params != nullptr) {
      auto dst = n.params->at(n.param_index).grad.values();
      auto src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      continue;
    }
    // The closure may append to grads of earlier nodes but never reallocates
    // nodes_, so holding `up` by reference is safe.
    const Tensor& up = n.grad;
    n.backward(*this, up);
  }
}

double value_and_grad(ParamSet& params,
                      const std::function<Var(Graph&)>& build) {
  params.zero_grad();
  Graph g;
  const Var root = build(g);
  const double v = g.value(root).item();
  g.backward(root);
  return v;
}

}  // namespace joco::ng
