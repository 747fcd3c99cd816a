#include "joco/problems/problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "joco/problems/composite.hpp"
#include "joco/util/error.hpp"

namespace joco::problems {

Problem::Problem(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {}

void Problem::check_domain(std::span<const double> x) const {
  if (x.size() != d()) throw DomainError("input outside domain");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) {
      throw DomainError("input outside domain");
    }
  }
}

Evaluation Problem::evaluate(std::span<const double> x) const {
  check_domain(x);
  Evaluation e;
  e.y = intermediate(x);
  e.f = reward(e.y);
  return e;
}

std::vector<double> Problem::from_unit(std::span<const double> u) const {
  std::vector<double> x(d());
  for (std::size_t i = 0; i < d(); ++i) {
    x[i] = std::clamp(lower_[i] + u[i] * (upper_[i] - lower_[i]), lower_[i], upper_[i]);
  }
  return x;
}

std::vector<double> Problem::to_unit(std::span<const double> x) const {
  std::vector<double> u(d());
  for (std::size_t i = 0; i < d(); ++i) {
    u[i] = std::clamp((x[i] - lower_[i]) / (upper_[i] - lower_[i]), 0.0, 1.0);
  }
  return u;
}

CountingProblem::CountingProblem(const Problem& inner, std::size_t limit)
    : Problem(inner.lower(), inner.upper()), inner_(inner), limit_(limit) {}

Evaluation CountingProblem::evaluate(std::span<const double> x) const {
  if (count_ >= limit_) throw std::logic_error("evaluation budget exceeded");
  Evaluation e = inner_.evaluate(x);
  ++count_;
  return e;
}

std::vector<std::string> problem_names() {
  return {"rosenbrock", "langermann", "environmental", "rover"};
}

std::unique_ptr<Problem> make_problem(std::string_view name) {
  if (name == "rosenbrock") return std::make_unique<RosenbrockComposite>();
  if (name == "langermann") return std::make_unique<LangermannComposite>();
  if (name == "environmental") return std::make_unique<EnvironmentalComposite>();
  if (name == "rover") return std::make_unique<RoverComposite>();
  throw std::invalid_argument("unknown problem: " + std::string(name));
}

}  // namespace joco::problems
