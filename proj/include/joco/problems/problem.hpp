#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace joco::problems {

struct Evaluation {
  std::vector<double> y;
  double f = 0.0;
};

/// Composite objective f = g(h(x)) over an axis-aligned box, maximized.
/// Evaluation is pure and thread-safe.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string_view name() const = 0;
  std::size_t d() const { return lower_.size(); }
  virtual std::size_t m() const = 0;
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  /// Throws DomainError "input outside domain" for a point outside the box
  /// (or of the wrong length, or non-finite).
  virtual Evaluation evaluate(std::span<const double> x) const;

  /// h(x) for a point already known to be in the domain.
  virtual std::vector<double> intermediate(std::span<const double> x) const = 0;
  /// g(y).
  virtual double reward(std::span<const double> y) const = 0;

  /// Maps unit-cube coordinates onto the box, clamped against rounding.
  std::vector<double> from_unit(std::span<const double> u) const;
  std::vector<double> to_unit(std::span<const double> x) const;

 protected:
  Problem(std::vector<double> lower, std::vector<double> upper);
  void check_domain(std::span<const double> x) const;

 private:
  std::vector<double> lower_, upper_;
};

/// Forwards to another problem and refuses evaluations past `limit`.
class CountingProblem final : public Problem {
 public:
  CountingProblem(const Problem& inner, std::size_t limit);

  std::string_view name() const override { return inner_.name(); }
  std::size_t m() const override { return inner_.m(); }
  Evaluation evaluate(std::span<const double> x) const override;
  std::vector<double> intermediate(std::span<const double> x) const override {
    return inner_.intermediate(x);
  }
  double reward(std::span<const double> y) const override { return inner_.reward(y); }

  std::size_t count() const { return count_; }
  std::size_t limit() const { return limit_; }

 private:
  const Problem& inner_;
  std::size_t limit_;
  mutable std::size_t count_ = 0;
};

/// Names accepted by make_problem, in a fixed order.
std::vector<std::string> problem_names();

/// Throws std::invalid_argument "unknown problem: <name>".
std::unique_ptr<Problem> make_problem(std::string_view name);

}  // namespace joco::problems
