#include "joco/method/design.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "joco/util/sobol.hpp"

namespace joco::method {
namespace {

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

ng::Tensor initial_design(std::size_t dim, std::size_t n, std::uint64_t seed) {
  auto rng = util::Rng::stream(seed, util::StreamTag::kSobolScramble);
  util::Sobol sobol(dim, rng);
  return ng::Tensor::matrix(n, dim, sobol.draw(n));
}

ng::Tensor uniform_in_box(const tr::Box& box, std::size_t n, util::Rng& rng) {
  const std::size_t d = box.lo.size();
  ng::Tensor out(ng::Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    double* r = out.row(i);
    for (std::size_t k = 0; k < d; ++k) r[k] = rng.uniform(box.lo[k], box.hi[k]);
  }
  return out;
}

tr::Box unit_box(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

std::size_t argmax_first(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("argmax of an empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Standardizer Standardizer::fit(std::span<const double> v) {
  Standardizer s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    if (sd > 0.0 && std::isfinite(sd)) s.scale = sd;
  }
  return s;
}

ColumnStandardizer ColumnStandardizer::fit(const ng::Tensor& m) {
  ColumnStandardizer c;
  std::vector<double> col(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t i = 0; i < m.rows(); ++i) col[i] = m(i, j);
    const Standardizer s = Standardizer::fit(col);
    c.mean.push_back(s.mean);
    c.scale.push_back(s.scale);
  }
  return c;
}

ng::Tensor ColumnStandardizer::apply(const ng::Tensor& m) const {
  ng::Tensor out = m;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* r = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) r[j] = (r[j] - mean[j]) / scale[j];
  }
  return out;
}

Evaluator::Evaluator(const problems::Problem& problem, History& history)
    : problem_(problem), history_(history), start_ns_(now_ns()) {}

const EvalRecord& Evaluator::evaluate_unit(std::span<const double> u) {
  EvalRecord r;
  r.x = problem_.from_unit(u);
  problems::Evaluation e = problem_.evaluate(r.x);
  r.y = std::move(e.y);
  r.f = e.f;
  history_.append(std::move(r), static_cast<double>(now_ns() - start_ns_) / 1e6);
  return history_.records.back();
}

ng::Tensor unit_inputs(const problems::Problem& p, const History& h, std::size_t first) {
  const std::size_t n = h.size() - first, d = p.d();
  ng::Tensor out(ng::Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = p.to_unit(h.records[first + i].x);
    std::copy(u.begin(), u.end(), out.row(i));
  }
  return out;
}

ng::Tensor outputs(const History& h, std::size_t first) {
  const std::size_t n = h.size() - first;
  const std::size_t m = n ? h.records[first].y.size() : 0;
  ng::Tensor out(ng::Shape{n, m});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& y = h.records[first + i].y;
    std::copy(y.begin(), y.end(), out.row(i));
  }
  return out;
}

std::vector<double> rewards(const History& h, std::size_t first) {
  std::vector<double> f;
  for (std::size_t i = first; i < h.size(); ++i) f.push_back(h.records[i].f);
  return f;
}

}  // namespace joco::method
