#pragma once

#include <cstddef>
#include <vector>

namespace joco::tr {

struct TrConfig {
  double l_init = 0.8;
  double l_min = 1.0 / 128.0;
  double l_max = 1.6;
  int tau_succ = 3;
  int tau_fail = 1;
  double success_tol = 1e-3;

  /// Defaults for a d-dimensional problem: tau_fail = min(d, 32).
  static TrConfig for_dim(std::size_t d);
};

/// Side length and success/failure counters for one trust region. The center
/// is stored in unit-cube coordinates.
struct TrState {
  std::vector<double> center;
  double length = 0.8;
  int success_count = 0;
  int failure_count = 0;
  int restarts = 0;

  static TrState initial(std::vector<double> center, const TrConfig& cfg);
};

struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// [center - L/2, center + L/2] clipped to the unit cube.
Box tr_bounds(const TrState& state);

/// Applies one observation. A success is f_new > f_best_prev +
/// tol * |f_best_prev|; tau_succ consecutive successes double the length (up to
/// l_max), tau_fail consecutive failures halve it. The center moves to x_new
/// whenever f_new > f_best_prev. A length below l_min is reset to l_init with
/// cleared counters and the center kept.
TrState tr_update(TrState state, double f_new, double f_best_prev,
                  const std::vector<double>& x_new, const TrConfig& cfg);

}  // namespace joco::tr
