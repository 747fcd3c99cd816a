#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace joco::method {

/// One observation: x in the problem domain, y = h(x), f = g(y).
struct EvalRecord {
  std::vector<double> x;
  std::vector<double> y;
  double f = 0.0;
};

/// Evaluations in order, with the running best and the elapsed time at each.
/// A run that aborts keeps what it collected and sets `error`.
struct History {
  std::vector<EvalRecord> records;
  std::vector<double> best_so_far;
  std::vector<double> wall_ms;
  std::string error;

  void append(EvalRecord r, double elapsed_ms);
  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  double best() const { return best_so_far.back(); }
  /// Index of the first record attaining the best value.
  std::size_t best_index() const;
};

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t n_b = 20;
  std::size_t epochs_init = 30;
  std::size_t epochs_update = 1;
  double init_fraction = 0.10;
  std::size_t n_sample = 1024;
  std::size_t k_mc = 32;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  /// round(init_fraction * budget), at least 2.
  std::size_t n_init(std::size_t budget) const;
};

enum class Acquisition { kThompson, kMcEi };

struct AblationFlags {
  bool joint_training = true;
  bool update_models = true;
  bool use_trust_region = true;
  bool outcome_uncertainty = true;
  bool reward_uncertainty = true;
  Acquisition acquisition = Acquisition::kThompson;
};

}  // namespace joco::method
