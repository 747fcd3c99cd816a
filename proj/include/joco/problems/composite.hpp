#pragma once

#include <array>
#include <vector>

#include "joco/numgrad/tensor.hpp"
#include "joco/problems/problem.hpp"

namespace joco::problems {

/// x in [-2, 2]^10. y interleaves (x[i+1] - x[i]^2, 1 - x[i]) for i < 9 and
/// f = -sum(100 * y[2i]^2 + y[2i+1]^2).
class RosenbrockComposite final : public Problem {
 public:
  RosenbrockComposite();
  std::string_view name() const override { return "rosenbrock"; }
  std::size_t m() const override { return 18; }
  std::vector<double> intermediate(std::span<const double> x) const override;
  double reward(std::span<const double> y) const override;
};

/// x in [0, 10]^16. y[i] = |x - A_i|^2 over the 60 rows of A and
/// f = sum c_i exp(-y_i / pi) cos(pi y_i).
class LangermannComposite final : public Problem {
 public:
  /// Constants from the checked-in data files.
  LangermannComposite();
  LangermannComposite(ng::Tensor a, ng::Tensor c);
  std::string_view name() const override { return "langermann"; }
  std::size_t m() const override { return a_.rows(); }
  std::vector<double> intermediate(std::span<const double> x) const override;
  double reward(std::span<const double> y) const override;
  const ng::Tensor& a() const { return a_; }
  const ng::Tensor& c() const { return c_; }

 private:
  ng::Tensor a_, c_;
};

/// Pollutant spill model. x in [0, 1]^15; the first four coordinates map to
/// mass M in [7, 13], diffusion D in [0.02, 0.12], location L in [0.01, 3]
/// and time tau in [30.01, 30.295], the rest are inert. y holds the
/// concentration on s in {0, 0.5, 1, 2.5} x t in {15, 30, 45, 60} (s major)
/// and f = -|y - y*|^2 against the grid at (10, 0.07, 1.505, 30.1525).
class EnvironmentalComposite final : public Problem {
 public:
  EnvironmentalComposite();
  std::string_view name() const override { return "environmental"; }
  std::size_t m() const override { return 16; }
  std::vector<double> intermediate(std::span<const double> x) const override;
  double reward(std::span<const double> y) const override;

  static constexpr std::array<double, 4> kS = {0.0, 0.5, 1.0, 2.5};
  static constexpr std::array<double, 4> kT = {15.0, 30.0, 45.0, 60.0};
  static std::array<double, 4> parameters(std::span<const double> x);
  static double concentration(double m, double d, double l, double tau, double s,
                              double t);
  const std::vector<double>& target() const { return target_; }

 private:
  std::vector<double> target_;
};

struct Obstacle {
  double x0, y0, x1, y1;  // inclusive corners
  bool contains(double px, double py) const {
    return px >= x0 && px <= x1 && py >= y0 && py <= y1;
  }
};

/// Clamped uniform cubic B-spline through `points` (k x 2, k >= 4) sampled at
/// `count` equispaced parameters in [0, 1]; returns count x 2 rows.
std::vector<std::array<double, 2>> bspline_curve(
    const std::vector<std::array<double, 2>>& points, std::size_t count);

/// x in [0, 1]^40 as 20 control points. y is the flattened 500-point
/// trajectory and f = -(mean collision cost + 10 * endpoint L1 errors) with a
/// cost of 20 inside any obstacle.
class RoverComposite final : public Problem {
 public:
  RoverComposite();
  explicit RoverComposite(std::vector<Obstacle> obstacles);
  std::string_view name() const override { return "rover"; }
  std::size_t m() const override { return 2 * kSteps; }
  std::vector<double> intermediate(std::span<const double> x) const override;
  double reward(std::span<const double> y) const override;
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }

  static constexpr std::size_t kSteps = 500;
  static constexpr std::array<double, 2> kStart = {0.05, 0.05};
  static constexpr std::array<double, 2> kGoal = {0.95, 0.95};

 private:
  std::vector<Obstacle> obstacles_;
};

}  // namespace joco::problems
