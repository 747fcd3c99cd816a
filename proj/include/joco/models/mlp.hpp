#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "joco/numgrad/graph.hpp"
#include "joco/numgrad/param_set.hpp"
#include "joco/numgrad/tensor.hpp"
#include "joco/util/rng.hpp"

namespace joco::models {

/// Fully connected feed-forward encoder. Hidden layers use tanh, the last
/// layer is linear. Layer k stores `<prefix>w<k>` (in x out) and
/// `<prefix>b<k>` (out) in a ParamSet.
class MlpEncoder {
 public:
  MlpEncoder() = default;
  MlpEncoder(std::string prefix, std::vector<std::size_t> widths);

  const std::string& prefix() const { return prefix_; }
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::size_t in_dim() const { return widths_.front(); }
  std::size_t out_dim() const { return widths_.back(); }
  std::size_t layer_count() const { return widths_.size() - 1; }

  std::string weight_name(std::size_t layer) const;
  std::string bias_name(std::size_t layer) const;

  /// Adds weights and biases drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  void add_params(ng::ParamSet& params, util::Rng& rng) const;

  /// Differentiable forward pass of an (n x in_dim) input.
  ng::Var forward(ng::Graph& g, ng::ParamSet& params, ng::Var x) const;

  /// Plain forward pass; bitwise equal to the graph version.
  ng::Tensor forward(const ng::ParamSet& params, const ng::Tensor& x) const;

 private:
  void check_input(const ng::Tensor& x) const;

  std::string prefix_;
  std::vector<std::size_t> widths_;
};

}  // namespace joco::models
