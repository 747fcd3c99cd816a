#include "joco/util/sobol.hpp"

#include <bit>
#include <stdexcept>

#include "sobol_directions.hpp"

namespace joco::util {

Sobol::Sobol(std::size_t dim) : dim_(dim) {
  init_directions();
  shift_.assign(dim_, 0);
  state_ = shift_;
}

Sobol::Sobol(std::size_t dim, Rng& rng) : dim_(dim) {
  init_directions();
  // Linear matrix scramble: bit i of the output (i = 0 most significant)
  // mixes input bits 0..i through a random lower-triangular matrix with unit
  // diagonal.
  for (std::size_t d = 0; d < dim_; ++d) {
    std::array<std::uint32_t, kBits> rows{};
    for (int i = 0; i < kBits; ++i) {
      const std::uint32_t diag = 1u << (kBits - 1 - i);
      const std::uint32_t above = i == 0 ? 0u : ~((diag << 1) - 1u);
      rows[i] = diag | (static_cast<std::uint32_t>(rng.next_u64()) & above);
    }
    for (auto& v : directions_[d]) {
      std::uint32_t out = 0;
      for (int i = 0; i < kBits; ++i) {
        if (std::popcount(rows[i] & v) & 1) out |= 1u << (kBits - 1 - i);
      }
      v = out;
    }
  }
  shift_.resize(dim_);
  for (auto& s : shift_) s = static_cast<std::uint32_t>(rng.next_u64() >> 32);
  state_ = shift_;
}

void Sobol::init_directions() {
  if (dim_ == 0 || dim_ > detail::kSobolMaxDim) {
    throw std::invalid_argument("Sobol: dimension must be in [1, 64]");
  }
  directions_.resize(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    auto& v = directions_[d];
    if (d == 0) {
      for (int j = 0; j < kBits; ++j) v[j] = 1u << (kBits - 1 - j);
      continue;
    }
    const std::uint32_t poly = detail::kSobolPoly[d];
    const int degree = std::bit_width(poly) - 1;
    for (int j = 0; j < degree; ++j) {
      v[j] = detail::kSobolInit[d][j] << (kBits - 1 - j);
    }
    for (int j = degree; j < kBits; ++j) {
      std::uint32_t nv = v[j - degree] ^ (v[j - degree] >> degree);
      for (int t = 1; t < degree; ++t) {
        if ((poly >> (degree - t)) & 1u) nv ^= v[j - t];
      }
      v[j] = nv;
    }
  }
}

std::vector<double> Sobol::next() {
  std::vector<double> point(dim_);
  for (std::size_t d = 0; d < dim_; ++d) {
    point[d] = static_cast<double>(state_[d]) * 0x1.0p-32;
  }
  const int bit = std::countr_one(index_);
  if (bit >= kBits) throw std::out_of_range("Sobol: sequence exhausted");
  for (std::size_t d = 0; d < dim_; ++d) state_[d] ^= directions_[d][bit];
  ++index_;
  return point;
}

std::vector<double> Sobol::draw(std::size_t n) {
  std::vector<double> out;
  out.reserve(n * dim_);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = next();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

}  // namespace joco::util
