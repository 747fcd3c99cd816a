#include "joco/numgrad/adam.hpp"

#include <cmath>
#include <numeric>

namespace joco::ng {

Adam::Adam(const ParamSet& params, AdamConfig config)
    : Adam(params,
           [&] {
             std::vector<std::size_t> all(params.size());
             std::iota(all.begin(), all.end(), std::size_t{0});
             return all;
           }(),
           config) {}

Adam::Adam(const ParamSet& params, std::vector<std::size_t> indices,
           AdamConfig config)
    : config_(config), indices_(std::move(indices)) {
  for (std::size_t i : indices_) {
    m_.emplace_back(params.at(i).value.size(), 0.0);
    v_.emplace_back(params.at(i).value.size(), 0.0);
  }
}

void Adam::step(ParamSet& params) {
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t s = 0; s < indices_.size(); ++s) {
    auto& entry = params.at(indices_[s]);
    auto x = entry.value.values();
    auto g = entry.grad.values();
    auto& m = m_[s];
    auto& v = v_[s];
    for (std::size_t i = 0; i < x.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      x[i] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

}  // namespace joco::ng
