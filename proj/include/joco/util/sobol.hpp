#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "joco/util/rng.hpp"

namespace joco::util {

/// Sobol low-discrepancy sequence in [0, 1)^dim (Joe-Kuo direction numbers,
/// Gray-code ordering, up to 64 dimensions). With a generator supplied, the
/// direction numbers get a random linear matrix scramble plus a digital
/// shift, which keeps every dyadic stratification property of the net.
class Sobol {
 public:
  static constexpr int kBits = 32;

  explicit Sobol(std::size_t dim);
  Sobol(std::size_t dim, Rng& scramble_rng);

  std::size_t dim() const { return dim_; }

  /// Next point in sequence order. The unscrambled sequence starts at 0.
  std::vector<double> next();

  /// Row-major n x dim block of the next n points.
  std::vector<double> draw(std::size_t n);

 private:
  void init_directions();

  std::size_t dim_;
  std::vector<std::array<std::uint32_t, kBits>> directions_;
  std::vector<std::uint32_t> shift_;
  std::vector<std::uint32_t> state_;
  std::uint64_t index_ = 0;
};

}  // namespace joco::util
