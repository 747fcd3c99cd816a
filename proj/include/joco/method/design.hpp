#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "joco/method/types.hpp"
#include "joco/numgrad/tensor.hpp"
#include "joco/problems/problem.hpp"
#include "joco/trustregion/trust_region.hpp"
#include "joco/util/rng.hpp"

namespace joco::method {

/// First n points of the scrambled Sobol sequence for `seed`, as an n x dim
/// matrix in the unit cube. Identical for every method given the seed.
ng::Tensor initial_design(std::size_t dim, std::size_t n, std::uint64_t seed);

/// n points drawn uniformly in the box, row by row.
ng::Tensor uniform_in_box(const tr::Box& box, std::size_t n, util::Rng& rng);

tr::Box unit_box(std::size_t dim);

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax_first(std::span<const double> v);

/// Mean and sample standard deviation (ddof 1); a zero or undefined spread
/// is reported as 1.
struct Standardizer {
  double mean = 0.0;
  double scale = 1.0;
  static Standardizer fit(std::span<const double> v);
  double apply(double v) const { return (v - mean) / scale; }
  double invert(double z) const { return mean + scale * z; }
};

/// Per-column version of Standardizer.
struct ColumnStandardizer {
  std::vector<double> mean;
  std::vector<double> scale;
  static ColumnStandardizer fit(const ng::Tensor& m);
  ng::Tensor apply(const ng::Tensor& m) const;
};

/// Evaluates a unit-cube point, appends it, and returns the new record.
class Evaluator {
 public:
  Evaluator(const problems::Problem& problem, History& history);
  const EvalRecord& evaluate_unit(std::span<const double> u);
  const problems::Problem& problem() const { return problem_; }
  History& history() { return history_; }

 private:
  const problems::Problem& problem_;
  History& history_;
  std::int64_t start_ns_;
};

/// Unit-cube inputs (n x d), raw intermediate outputs (n x m) and raw
/// rewards (n) of the records [first, end).
ng::Tensor unit_inputs(const problems::Problem& p, const History& h, std::size_t first = 0);
ng::Tensor outputs(const History& h, std::size_t first = 0);
std::vector<double> rewards(const History& h, std::size_t first = 0);

}  // namespace joco::method
