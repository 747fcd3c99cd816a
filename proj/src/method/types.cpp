#include "joco/method/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace joco::method {

void History::append(EvalRecord r, double elapsed_ms) {
  const double best = best_so_far.empty() ? r.f : std::max(best_so_far.back(), r.f);
  records.push_back(std::move(r));
  best_so_far.push_back(best);
  wall_ms.push_back(elapsed_ms);
}

std::size_t History::best_index() const {
  if (records.empty()) throw std::logic_error("empty history");
  std::size_t idx = 0;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].f > records[idx].f) idx = i;
  return idx;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(init_fraction > 0.0 && init_fraction < 1.0)) {
    throw std::invalid_argument("init fraction must be in (0, 1)");
  }
  if (n_b == 0) throw std::invalid_argument("n_b must be positive");
  if (epochs_init == 0) throw std::invalid_argument("epochs_init must be positive");
  if (n_sample == 0) throw std::invalid_argument("n_sample must be positive");
  if (k_mc == 0) throw std::invalid_argument("k_mc must be positive");
}

std::size_t TrainConfig::n_init(std::size_t budget) const {
  const auto n = static_cast<std::size_t>(std::llround(init_fraction * static_cast<double>(budget)));
  return std::max<std::size_t>(n, 2);
}

}  // namespace joco::method
