#pragma once

#include <cstddef>
#include <vector>

#include "joco/numgrad/param_set.hpp"

namespace joco::ng {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments over a subset of a ParamSet. Moments start
/// at zero on construction.
class Adam {
 public:
  /// Optimizes every entry of `params`.
  Adam(const ParamSet& params, AdamConfig config);
  /// Optimizes only the listed entry indices.
  Adam(const ParamSet& params, std::vector<std::size_t> indices,
       AdamConfig config);

  /// Applies one update from the gradients currently stored in `params`.
  void step(ParamSet& params);

  std::size_t steps_taken() const { return step_; }

 private:
  AdamConfig config_;
  std::vector<std::size_t> indices_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t step_ = 0;
};

}  // namespace joco::ng
