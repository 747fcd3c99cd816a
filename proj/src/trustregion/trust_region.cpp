#include "joco/trustregion/trust_region.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace joco::tr {

TrConfig TrConfig::for_dim(std::size_t d) {
  TrConfig cfg;
  cfg.tau_fail = static_cast<int>(std::min<std::size_t>(std::max<std::size_t>(d, 1), 32));
  return cfg;
}

TrState TrState::initial(std::vector<double> center, const TrConfig& cfg) {
  TrState s;
  s.center = std::move(center);
  s.length = cfg.l_init;
  return s;
}

Box tr_bounds(const TrState& state) {
  Box box;
  const double half = 0.5 * state.length;
  for (double c : state.center) {
    box.lo.push_back(std::clamp(c - half, 0.0, 1.0));
    box.hi.push_back(std::clamp(c + half, 0.0, 1.0));
  }
  return box;
}

TrState tr_update(TrState state, double f_new, double f_best_prev,
                  const std::vector<double>& x_new, const TrConfig& cfg) {
  if (x_new.size() != state.center.size()) {
    throw std::invalid_argument("tr_update: point dimension does not match center");
  }
  if (f_new > f_best_prev + cfg.success_tol * std::abs(f_best_prev)) {
    ++state.success_count;
    state.failure_count = 0;
    if (state.success_count >= cfg.tau_succ) {
      state.length = std::min(2.0 * state.length, cfg.l_max);
      state.success_count = 0;
    }
  } else {
    ++state.failure_count;
    state.success_count = 0;
    if (state.failure_count >= cfg.tau_fail) {
      state.length /= 2.0;
      state.failure_count = 0;
    }
  }
  if (f_new > f_best_prev) state.center = x_new;
  if (state.length < cfg.l_min) {
    state.length = cfg.l_init;
    state.success_count = 0;
    state.failure_count = 0;
    ++state.restarts;
  }
  return state;
}

}  // namespace joco::tr
