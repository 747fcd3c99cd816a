#include "joco/models/mlp.hpp"

#include <cmath>

#include "joco/numgrad/linalg.hpp"
#include "joco/util/error.hpp"

namespace joco::models {

MlpEncoder::MlpEncoder(std::string prefix, std::vector<std::size_t> widths)
    : prefix_(std::move(prefix)), widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ShapeError("encoder needs at least one layer");
  for (std::size_t w : widths_) {
    if (w == 0) throw ShapeError("encoder widths must be positive");
  }
}

std::string MlpEncoder::weight_name(std::size_t layer) const {
  return prefix_ + "w" + std::to_string(layer);
}

std::string MlpEncoder::bias_name(std::size_t layer) const {
  return prefix_ + "b" + std::to_string(layer);
}

void MlpEncoder::add_params(ng::ParamSet& params, util::Rng& rng) const {
  for (std::size_t k = 0; k < layer_count(); ++k) {
    const std::size_t in = widths_[k], out = widths_[k + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    ng::Tensor w(ng::Shape{in, out});
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    ng::Tensor b(ng::Shape{out});
    for (double& v : b.values()) v = rng.uniform(-bound, bound);
    params.add(weight_name(k), std::move(w));
    params.add(bias_name(k), std::move(b));
  }
}

void MlpEncoder::check_input(const ng::Tensor& x) const {
  if (!x.is_matrix() || x.cols() != in_dim()) throw ShapeError("encoder width mismatch");
}

ng::Var MlpEncoder::forward(ng::Graph& g, ng::ParamSet& params, ng::Var x) const {
  check_input(g.value(x));
  ng::Var h = x;
  for (std::size_t k = 0; k < layer_count(); ++k) {
    h = g.add_rows(g.matmul(h, g.param(params, weight_name(k))),
                   g.param(params, bias_name(k)));
    if (k + 1 < layer_count()) h = g.tanh(h);
  }
  return h;
}

ng::Tensor MlpEncoder::forward(const ng::ParamSet& params,
                               const ng::Tensor& x) const {
  check_input(x);
  ng::Tensor h = x;
  for (std::size_t k = 0; k < layer_count(); ++k) {
    h = ng::matmul(h, params.value(weight_name(k)));
    const ng::Tensor& b = params.value(bias_name(k));
    for (std::size_t i = 0; i < h.rows(); ++i) {
      double* r = h.row(i);
      for (std::size_t j = 0; j < h.cols(); ++j) r[j] += b[j];
    }
    if (k + 1 < layer_count()) {
      for (double& v : h.values()) v = std::tanh(v);
    }
  }
  return h;
}

}  // namespace joco::models
