#include "joco/problems/composite.hpp"

#include <cmath>
#include <numbers>

#include "joco/problems/data_files.hpp"

namespace joco::problems {

RosenbrockComposite::RosenbrockComposite()
    : Problem(std::vector<double>(10, -2.0), std::vector<double>(10, 2.0)) {}

std::vector<double> RosenbrockComposite::intermediate(std::span<const double> x) const {
  std::vector<double> y(18);
  for (std::size_t i = 0; i + 1 < 10; ++i) {
    y[2 * i] = x[i + 1] - x[i] * x[i];
    y[2 * i + 1] = 1.0 - x[i];
  }
  return y;
}

double RosenbrockComposite::reward(std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    s += 100.0 * y[2 * i] * y[2 * i] + y[2 * i + 1] * y[2 * i + 1];
  }
  return -s;
}

LangermannComposite::LangermannComposite()
    : LangermannComposite(load_constant("langermann_A"), load_constant("langermann_c")) {}

LangermannComposite::LangermannComposite(ng::Tensor a, ng::Tensor c)
    : Problem(std::vector<double>(a.cols(), 0.0), std::vector<double>(a.cols(), 10.0)),
      a_(std::move(a)),
      c_(std::move(c)) {}

std::vector<double> LangermannComposite::intermediate(std::span<const double> x) const {
  std::vector<double> y(a_.rows());
  for (std::size_t i = 0; i < a_.rows(); ++i) {
    const double* ai = a_.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a_.cols(); ++j) {
      const double t = x[j] - ai[j];
      s += t * t;
    }
    y[i] = s;
  }
  return y;
}

double LangermannComposite::reward(std::span<const double> y) const {
  constexpr double pi = std::numbers::pi;
  double f = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    f += c_[i] * std::exp(-y[i] / pi) * std::cos(pi * y[i]);
  }
  return f;
}

EnvironmentalComposite::EnvironmentalComposite()
    : Problem(std::vector<double>(15, 0.0), std::vector<double>(15, 1.0)) {
  const std::vector<double> mid(15, 0.5);
  target_ = intermediate(mid);
}

std::array<double, 4> EnvironmentalComposite::parameters(std::span<const double> x) {
  return {7.0 + 6.0 * x[0], 0.02 + 0.1 * x[1], 0.01 + 2.99 * x[2],
          30.01 + 0.285 * x[3]};
}

double EnvironmentalComposite::concentration(double m, double d, double l,
                                             double tau, double s, double t) {
  constexpr double pi = std::numbers::pi;
  double c = m / std::sqrt(4.0 * pi * d * t) * std::exp(-s * s / (4.0 * d * t));
  if (t > tau) {
    const double dt = t - tau;
    c += m / std::sqrt(4.0 * pi * d * dt) * std::exp(-(s - l) * (s - l) / (4.0 * d * dt));
  }
  return c;
}

std::vector<double> EnvironmentalComposite::intermediate(std::span<const double> x) const {
  const auto [m, d, l, tau] = parameters(x);
  std::vector<double> y;
  y.reserve(16);
  for (double s : kS)
    for (double t : kT) y.push_back(concentration(m, d, l, tau, s, t));
  return y;
}

double EnvironmentalComposite::reward(std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - target_[i];
    s += r * r;
  }
  return -s;
}

std::vector<std::array<double, 2>> bspline_curve(
    const std::vector<std::array<double, 2>>& points, std::size_t count) {
  constexpr std::size_t p = 3;
  const std::size_t n = points.size();
  // Clamped knots: p + 1 zeros, uniform interior, p + 1 ones.
  const std::size_t spans = n - p;
  std::vector<double> knots(n + p + 1);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (i <= p) {
      knots[i] = 0.0;
    } else if (i >= n) {
      knots[i] = 1.0;
    } else {
      knots[i] = static_cast<double>(i - p) / static_cast<double>(spans);
    }
  }
  std::vector<std::array<double, 2>> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double u = count == 1 ? 0.0
                                : static_cast<double>(s) / static_cast<double>(count - 1);
    // Knot span k with knots[k] <= u < knots[k + 1], last span closed.
    std::size_t k = p;
    while (k + 1 < n && u >= knots[k + 1]) ++k;
    std::array<std::array<double, 2>, p + 1> dd;
    for (std::size_t j = 0; j <= p; ++j) dd[j] = points[k - p + j];
    for (std::size_t r = 1; r <= p; ++r) {
      for (std::size_t j = p; j >= r; --j) {
        const std::size_t i = k - p + j;
        const double denom = knots[i + p + 1 - r] - knots[i];
        const double alpha = denom == 0.0 ? 0.0 : (u - knots[i]) / denom;
        for (int c = 0; c < 2; ++c) dd[j][c] = (1.0 - alpha) * dd[j - 1][c] + alpha * dd[j][c];
      }
    }
    out[s] = dd[p];
  }
  return out;
}

RoverComposite::RoverComposite() : RoverComposite(std::vector<Obstacle>{}) {
  const ng::Tensor t = load_constant("rover_obstacles");
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const double hw = 0.5 * t(i, 2), hh = 0.5 * t(i, 3);
    obstacles_.push_back({t(i, 0) - hw, t(i, 1) - hh, t(i, 0) + hw, t(i, 1) + hh});
  }
}

RoverComposite::RoverComposite(std::vector<Obstacle> obstacles)
    : Problem(std::vector<double>(40, 0.0), std::vector<double>(40, 1.0)),
      obstacles_(std::move(obstacles)) {}

std::vector<double> RoverComposite::intermediate(std::span<const double> x) const {
  std::vector<std::array<double, 2>> points(20);
  for (std::size_t k = 0; k < 20; ++k) points[k] = {x[2 * k], x[2 * k + 1]};
  const auto curve = bspline_curve(points, kSteps);
  std::vector<double> y;
  y.reserve(2 * kSteps);
  for (const auto& p : curve) {
    y.push_back(p[0]);
    y.push_back(p[1]);
  }
  return y;
}

double RoverComposite::reward(std::span<const double> y) const {
  const std::size_t steps = y.size() / 2;
  double cost = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (const Obstacle& o : obstacles_) {
      if (o.contains(y[2 * t], y[2 * t + 1])) {
        cost += 20.0;
        break;
      }
    }
  }
  const double start = std::abs(y[0] - kStart[0]) + std::abs(y[1] - kStart[1]);
  const double goal = std::abs(y[2 * steps - 2] - kGoal[0]) +
                      std::abs(y[2 * steps - 1] - kGoal[1]);
  return -(cost / static_cast<double>(steps) + 10.0 * (start + goal));
}

}  // namespace joco::problems
