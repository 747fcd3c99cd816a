#pragma once

#include <array>
#include <cstdint>

namespace joco::util {

/// Philox4x64-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure function of (counter, key).
std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> counter,
                                        std::array<std::uint64_t, 2> key);

/// Independent draw streams within one run. Each tag keys its own Philox
/// stream so changing how many draws one component consumes never shifts
/// another component's numbers.
enum class StreamTag : std::uint64_t {
  kModelInit = 1,
  kSobolScramble = 2,
  kCandidates = 3,
  kPosteriorDraws = 4,
  kRandomSearch = 5,
  kProblemConstants = 6,
  kTest = 99,
};

/// Counter-based generator. The counter is pre-incremented before each block,
/// so the first block of a fresh stream is philox4x64({1,0,0,0}, key). This
/// matches numpy.random.Philox(key=...) raw output.
class Rng {
 public:
  explicit Rng(std::array<std::uint64_t, 2> key,
               std::array<std::uint64_t, 4> counter = {0, 0, 0, 0})
      : key_(key), counter_(counter) {}

  static Rng stream(std::uint64_t seed, StreamTag tag) {
    return Rng({seed, static_cast<std::uint64_t>(tag)});
  }

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Box-Muller transform; the second value of each
  /// pair is cached.
  double normal();

  /// Uniform integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n);

 private:
  void refill();

  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> counter_;
  std::array<std::uint64_t, 4> block_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace joco::util
