#include <algorithm>
#include <cmath>
#include <numbers>

#include "dense_oracle.hpp"
#include "doctest.h"
#include "joco/method/joco.hpp"
#include "joco/problems/composite.hpp"
#include "joco/util/error.hpp"
#include "test_support.hpp"

using namespace joco;
using method::AblationFlags;
using method::Batch;
using method::JocoModels;
using method::TrainConfig;
using ng::Tensor;

namespace {

constexpr double kDoubledLoss = 6.4181802930768832;
constexpr std::size_t kLockedThompson = 106;
constexpr std::size_t kLockedEi = 30;

oracle::Rbf oracle_kernel(const models::GpHyperparams& h) {
  oracle::Rbf k;
  for (double l : h.log_lengthscales.values()) k.lengthscales.push_back(std::exp(l));
  k.signal_var = std::exp(h.log_signal_var);
  k.noise_var = h.noise_var();
  k.mean = h.mean;
  return k;
}

oracle::Matrix rows_of(const Tensor& t) {
  oracle::Matrix out(t.rows(), oracle::Vector(t.cols()));
  for (std::size_t i = 0; i < t.rows(); ++i)
    for (std::size_t j = 0; j < t.cols(); ++j) out[i][j] = t(i, j);
  return out;
}

// Evaluates n scrambled-Sobol points of `p` into a history.
method::History sobol_history(const problems::Problem& p, std::size_t n,
                              std::uint64_t seed) {
  method::History h;
  method::Evaluator eval(p, h);
  const Tensor u = method::initial_design(p.d(), n, seed);
  for (std::size_t i = 0; i < n; ++i)
    eval.evaluate_unit(std::span<const double>(u.row(i), p.d()));
  return h;
}

JocoModels models_for(const problems::Problem& p, const method::History& h,
                      std::uint64_t seed) {
  auto rng = util::Rng::stream(seed, util::StreamTag::kModelInit);
  JocoModels m = JocoModels::create(method::Architecture::for_problem(p), rng);
  m.y_norm = method::ColumnStandardizer::fit(method::outputs(h));
  m.f_norm = method::Standardizer::fit(method::rewards(h));
  return m;
}

// Negated mean log density assembled from the dense oracle.
double oracle_loss(const JocoModels& m, const Batch& b) {
  const Tensor x_hat = m.e_x.forward(m.params, b.x);
  const Tensor y_hat = m.e_y.forward(m.params, m.y_norm.apply(b.y));
  const oracle::Matrix xs = rows_of(x_hat), ys = rows_of(y_hat);
  double total = 0.0;
  for (std::size_t j = 0; j < m.heads(); ++j) {
    oracle::Vector target(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) target[i] = y_hat(i, j);
    total += oracle::gp_log_marginal(
        oracle_kernel(models::read_gp_params(m.params, JocoModels::head_prefix(j))), xs,
        target);
  }
  oracle::Vector f(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) f[i] = m.f_norm.apply(b.f[i]);
  total += oracle::gp_log_marginal(
      oracle_kernel(models::read_gp_params(m.params, JocoModels::kRewardPrefix)), ys, f);
  return -total / static_cast<double>(b.size());
}

Batch doubled(const Batch& b) {
  const std::size_t n = b.size();
  Batch out{Tensor(ng::Shape{2 * n, b.x.cols()}), Tensor(ng::Shape{2 * n, b.y.cols()}), {}};
  for (std::size_t r = 0; r < 2 * n; ++r) {
    std::copy_n(b.x.row(r % n), b.x.cols(), out.x.row(r));
    std::copy_n(b.y.row(r % n), b.y.cols(), out.y.row(r));
    out.f.push_back(b.f[r % n]);
  }
  return out;
}

double grad_norm(const ng::ParamSet& ps, const std::string& prefix) {
  double s = 0.0;
  for (std::size_t i : ps.select({prefix}))
    for (double g : ps.at(i).grad.values()) s += g * g;
  return std::sqrt(s);
}

// One-dimensional models with identity encoders. The head GP sees a bump at
// x = 0.5 and the reward GP maps latent outcome 3 to reward 3.
struct Constructed {
  JocoModels m;
  method::Surrogate s;
};

Constructed constructed() {
  auto rng = util::Rng::stream(7, util::StreamTag::kTest);
  JocoModels m = JocoModels::create({{1, 1}, {1, 1}}, rng);
  m.params.value("ex.w0") = Tensor::identity(1);
  m.params.value("ex.b0") = Tensor(ng::Shape{1});
  m.params.value("ey.w0") = Tensor::identity(1);
  m.params.value("ey.b0") = Tensor(ng::Shape{1});
  models::GpHyperparams h = models::GpHyperparams::defaults(1);
  h.log_lengthscales[0] = std::log(0.1);
  h.set_log_noise_var(std::log(1e-6));
  models::ExactGp head{h, Tensor::matrix({{0.1}, {0.5}, {0.9}}), Tensor::vector({0.0, 3.0, 0.0})};
  models::GpHyperparams g = models::GpHyperparams::defaults(1);
  g.set_log_noise_var(std::log(1e-6));
  models::ExactGp reward{g, Tensor::matrix({{0.0}, {3.0}}), Tensor::vector({0.0, 3.0})};
  method::Surrogate s{{models::FittedGp(head)}, models::FittedGp(reward)};
  return {std::move(m), std::move(s)};
}

AblationFlags mean_only() {
  AblationFlags f;
  f.outcome_uncertainty = false;
  f.reward_uncertainty = false;
  return f;
}

TrainConfig quick_config() {
  TrainConfig cfg;
  cfg.n_sample = 128;
  return cfg;
}

}  // namespace

TEST_CASE("loss with zero encoders is a sum of univariate log densities") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 1, 3);
  JocoModels m = models_for(p, h, 3);
  for (std::size_t i : m.params.select({"ex.", "ey."})) m.params.at(i).value.fill(0.0);
  m.f_norm = {};
  const Batch b = method::make_batch(p, h);

  const double var = 1.0 + 1e-2;
  auto logpdf = [&](double v) {
    return -0.5 * v * v / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
  };
  const double expected =
      -(static_cast<double>(m.heads()) * logpdf(0.0) + logpdf(b.f[0]));
  CHECK(m.heads() == 8);
  CHECK(testing::close(method::joco_loss(m, b), expected, 1e-12, 1e-12));
}

TEST_CASE("loss matches the dense oracle on random batches") {
  problems::RosenbrockComposite p;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const method::History h = sobol_history(p, 12, seed);
    JocoModels m = models_for(p, h, seed);
    const Batch b = method::make_batch(p, h);
    CHECK(testing::close(method::joco_loss(m, b), oracle_loss(m, b), 1e-10, 1e-10));
  }
}

TEST_CASE("loss terms computed separately sum to the joint value") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 15, 11);
  JocoModels m = models_for(p, h, 11);
  const Batch b = method::make_batch(p, h);
  const double both = method::joco_loss(m, b, method::LossPart::kBoth);
  const double outcome = method::joco_loss(m, b, method::LossPart::kOutcome);
  const double reward = method::joco_loss(m, b, method::LossPart::kReward);
  CHECK(std::abs(outcome + reward - both) <= 1e-12 * std::max(1.0, std::abs(both)));
}

TEST_CASE("duplicated batch changes the loss only through the joint density") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 6, 5);
  JocoModels m = models_for(p, h, 5);
  const Batch b = method::make_batch(p, h);
  const Batch bb = doubled(b);
  const double single = method::joco_loss(m, b);
  const double twice = method::joco_loss(m, bb);
  CHECK(testing::close(twice, oracle_loss(m, bb), 1e-10, 1e-10));
  CHECK(single != twice);
  CHECK(testing::close(twice, kDoubledLoss, 1e-9, 1e-12));
}

TEST_CASE("encoded outcomes couple the two loss terms") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 8, 2);
  JocoModels m = models_for(p, h, 2);
  const Batch b = method::make_batch(p, h);
  for (auto part : {method::LossPart::kOutcome, method::LossPart::kReward}) {
    ng::value_and_grad(m.params, [&](ng::Graph& g) { return method::joco_loss(g, m, b, part); });
    CHECK(grad_norm(m.params, "ey.") > 0.0);
  }
  ng::value_and_grad(m.params, [&](ng::Graph& g) {
    return method::joco_loss(g, m, b, method::LossPart::kReward);
  });
  CHECK(grad_norm(m.params, "ex.") == 0.0);
  CHECK(grad_norm(m.params, "h0.") == 0.0);
}

TEST_CASE("loss gradient matches central differences") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 5, 9);
  JocoModels m = models_for(p, h, 9);
  const Batch b = method::make_batch(p, h);
  ng::value_and_grad(m.params, [&](ng::Graph& g) { return method::joco_loss(g, m, b); });
  const auto analytic = testing::flat_grads(m.params);
  const auto numeric = testing::finite_difference(m.params, [&] { return method::joco_loss(m, b); });
  REQUIRE(analytic.size() == numeric.size());
  for (std::size_t i = 0; i < analytic.size(); ++i)
    CHECK(testing::close(analytic[i], numeric[i], 1e-4, 1e-7));
}

TEST_CASE("empty batch is rejected") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 2, 1);
  JocoModels m = models_for(p, h, 1);
  CHECK_THROWS_AS(method::joco_loss(m, method::make_batch(p, h, 2)), std::invalid_argument);
}

TEST_CASE("fit_initial with zero epochs leaves parameters unchanged") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 10, 4);
  JocoModels m = models_for(p, h, 4);
  const ng::ParamSet before = m.params;
  TrainConfig cfg;
  cfg.epochs_init = 0;
  method::fit_initial(m, method::make_batch(p, h), cfg);
  CHECK(m.params.same_values(before));
}

TEST_CASE("fit_initial rejects fewer than two records") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 1, 4);
  JocoModels m = models_for(p, h, 4);
  CHECK_THROWS_AS(method::fit_initial(m, method::make_batch(p, h), TrainConfig{}),
                  std::invalid_argument);
}

TEST_CASE("fit_initial is deterministic") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 10, 6);
  JocoModels a = models_for(p, h, 6), b = models_for(p, h, 6);
  method::fit_initial(a, method::make_batch(p, h), TrainConfig{});
  method::fit_initial(b, method::make_batch(p, h), TrainConfig{});
  CHECK(a.params.same_values(b.params));
}

TEST_CASE("thirty epochs on twenty Rosenbrock points lower the loss") {
  problems::RosenbrockComposite p;
  int improved = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const method::History h = sobol_history(p, 20, seed);
    JocoModels m = models_for(p, h, seed);
    const Batch b = method::make_batch(p, h);
    const double before = method::joco_loss(m, b);
    method::fit_initial(m, b, TrainConfig{});
    const double after = method::joco_loss(m, b);
    if (seed == 1) CHECK(after < before);
    if (after <= before) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("update_step is a no-op when updates are disabled") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 10, 8);
  JocoModels m = models_for(p, h, 8);
  const ng::ParamSet before = m.params;
  AblationFlags flags;
  flags.update_models = false;
  method::update_step(m, method::recent_batch(p, h, 20), TrainConfig{}, flags);
  CHECK(m.params.same_values(before));
}

TEST_CASE("n_b beyond the history uses every record") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 7, 8);
  const Batch b = method::recent_batch(p, h, 20);
  CHECK(b.size() == 7);
  CHECK(b.x == method::unit_inputs(p, h));
  const Batch tail = method::recent_batch(p, h, 3);
  CHECK(tail.size() == 3);
  const std::vector<double> f = method::rewards(h);
  CHECK(tail.f == std::vector<double>(f.end() - 3, f.end()));

  JocoModels a = models_for(p, h, 8), c = models_for(p, h, 8);
  method::update_step(a, b, TrainConfig{}, AblationFlags{});
  method::update_step(c, method::make_batch(p, h), TrainConfig{}, AblationFlags{});
  CHECK(a.params.same_values(c.params));
}

TEST_CASE("joint and separate training reach different parameters") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 10, 12);
  JocoModels joint = models_for(p, h, 12), separate = models_for(p, h, 12);
  const Batch b = method::make_batch(p, h);
  AblationFlags flags;
  method::update_step(joint, b, TrainConfig{}, flags);
  flags.joint_training = false;
  method::update_step(separate, b, TrainConfig{}, flags);
  CHECK_FALSE(joint.params.same_values(separate.params));
}

TEST_CASE("separate training moves each group only against its own term") {
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 10, 13);
  JocoModels m = models_for(p, h, 13);
  const Batch b = method::make_batch(p, h);
  JocoModels ref = m;
  AblationFlags flags;
  flags.joint_training = false;
  method::update_step(m, b, TrainConfig{}, flags);
  for (std::size_t i : m.outcome_indices())
    CHECK_FALSE(m.params.at(i).value == ref.params.at(i).value);
  for (std::size_t i : m.reward_indices())
    CHECK_FALSE(m.params.at(i).value == ref.params.at(i).value);
}

TEST_CASE("thompson with a single candidate returns it") {
  Constructed c = constructed();
  auto draws = util::Rng::stream(1, util::StreamTag::kPosteriorDraws);
  CHECK(method::thompson_choose(c.m, c.s, Tensor::matrix({{0.3}}), AblationFlags{}, draws) == 0);
  auto cand = util::Rng::stream(1, util::StreamTag::kCandidates);
  const tr::Box box{{0.2}, {0.4}};
  const auto x = method::thompson_sample(c.m, c.s, box, 1, AblationFlags{}, cand, draws);
  REQUIRE(x.size() == 1);
  CHECK(x[0] >= 0.2);
  CHECK(x[0] <= 0.4);
}

TEST_CASE("thompson with both flags off returns the argmax of the means") {
  Constructed c = constructed();
  auto draws = util::Rng::stream(1, util::StreamTag::kPosteriorDraws);
  const Tensor cand = Tensor::matrix({{0.1}, {0.9}, {0.5}, {0.3}, {0.7}});
  CHECK(method::thompson_choose(c.m, c.s, cand, mean_only(), draws) == 2);
  // Pure function of the candidate set: no draws consumed.
  auto fresh = util::Rng::stream(1, util::StreamTag::kPosteriorDraws);
  CHECK(draws.normal() == fresh.normal());
}

TEST_CASE("thompson rejects an empty candidate count") {
  Constructed c = constructed();
  auto cand = util::Rng::stream(1, util::StreamTag::kCandidates);
  auto draws = util::Rng::stream(1, util::StreamTag::kPosteriorDraws);
  CHECK_THROWS_AS(method::thompson_sample(c.m, c.s, tr::Box{{0.0}, {1.0}}, 0, AblationFlags{},
                                          cand, draws),
                  std::invalid_argument);
}

TEST_CASE("ei with zero variance picks the only candidate above the incumbent") {
  Constructed c = constructed();
  auto draws = util::Rng::stream(1, util::StreamTag::kPosteriorDraws);
  const Tensor cand = Tensor::matrix({{0.1}, {0.9}, {0.5}, {0.3}});
  CHECK(method::mc_ei_choose(c.m, c.s, cand, 1.0, 4, mean_only(), draws) == 2);
}

TEST_CASE("ei ties at zero improvement return the first candidate") {
  Constructed c = constructed();
  auto draws = util::Rng::stream(1, util::StreamTag::kPosteriorDraws);
  const Tensor cand = Tensor::matrix({{0.1}, {0.9}, {0.5}, {0.3}});
  CHECK(method::mc_ei_choose(c.m, c.s, cand, 100.0, 4, mean_only(), draws) == 0);
  CHECK_THROWS_AS(method::mc_ei_choose(c.m, c.s, cand, 0.0, 0, mean_only(), draws),
                  std::invalid_argument);
}

TEST_CASE("acquisition choices are reproducible") {
  testing::IsaGuard guard;
  simd::set_active(simd::Isa::kScalar);
  problems::RosenbrockComposite p;
  const method::History h = sobol_history(p, 20, 21);
  JocoModels m = models_for(p, h, 21);
  method::fit_initial(m, method::make_batch(p, h), TrainConfig{});
  const method::Surrogate s = method::fit_surrogate(m, method::make_batch(p, h));
  auto cand_rng = util::Rng::stream(21, util::StreamTag::kCandidates);
  const Tensor cand = method::uniform_in_box(method::unit_box(p.d()), 256, cand_rng);

  auto draws = util::Rng::stream(21, util::StreamTag::kPosteriorDraws);
  const std::size_t ts = method::thompson_choose(m, s, cand, AblationFlags{}, draws);
  auto again = util::Rng::stream(21, util::StreamTag::kPosteriorDraws);
  CHECK(method::thompson_choose(m, s, cand, AblationFlags{}, again) == ts);
  CHECK(ts == kLockedThompson);

  auto ei_draws = util::Rng::stream(21, util::StreamTag::kPosteriorDraws);
  const std::size_t ei = method::mc_ei_choose(m, s, cand, m.f_norm.mean, 32, AblationFlags{}, ei_draws);
  CHECK(ei == kLockedEi);
}

TEST_CASE("budget one past the initial design gives one guided evaluation") {
  problems::RosenbrockComposite p;
  const TrainConfig cfg = quick_config();
  CHECK(cfg.n_init(3) == 2);
  int calls = 0;
  const method::History h = method::run_joco(p, 3, cfg, AblationFlags{}, 1,
                                             [&](const JocoModels&, const method::History& hh,
                                                 const tr::TrState&) {
                                               ++calls;
                                               CHECK(hh.size() == 3);
                                             });
  CHECK(h.error.empty());
  CHECK(h.size() == 3);
  CHECK(calls == 1);
  CHECK_THROWS_AS(method::run_joco(p, 2, cfg, AblationFlags{}, 1), std::invalid_argument);
}

TEST_CASE("run_joco is deterministic and stays in the domain") {
  problems::RosenbrockComposite p;
  const TrainConfig cfg = quick_config();
  const method::History a = method::run_joco(p, 16, cfg, AblationFlags{}, 4);
  const method::History b = method::run_joco(p, 16, cfg, AblationFlags{}, 4);
  REQUIRE(a.error.empty());
  REQUIRE(a.size() == 16);
  REQUIRE(b.size() == 16);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].x == b.records[i].x);
    CHECK(a.records[i].y == b.records[i].y);
    CHECK(a.records[i].f == b.records[i].f);
    for (std::size_t k = 0; k < p.d(); ++k) {
      CHECK(a.records[i].x[k] >= p.lower()[k]);
      CHECK(a.records[i].x[k] <= p.upper()[k]);
    }
    if (i > 0) CHECK(a.best_so_far[i] >= a.best_so_far[i - 1]);
    CHECK(a.best_so_far[i] == std::max(a.records[i].f, i ? a.best_so_far[i - 1] : a.records[i].f));
  }
}

TEST_CASE("initial design is shared and the trust region starts at its best point") {
  problems::RosenbrockComposite p;
  const TrainConfig cfg = quick_config();
  const std::size_t n_init = cfg.n_init(20);
  const method::History ref = sobol_history(p, n_init, 9);
  const Tensor design = method::initial_design(p.d(), n_init, 9);
  const std::size_t best = ref.best_index();
  const std::vector<double> start(design.row(best), design.row(best) + p.d());
  bool first = true;
  const method::History h = method::run_joco(
      p, 20, cfg, AblationFlags{}, 9,
      [&](const JocoModels&, const method::History& hh, const tr::TrState& st) {
        if (!first) return;
        first = false;
        if (hh.records.back().f <= ref.best()) CHECK(st.center == start);
      });
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(h.records[i].x == ref.records[i].x);
}

TEST_CASE("zero update epochs match disabled updates") {
  problems::RosenbrockComposite p;
  TrainConfig cfg = quick_config();
  std::vector<ng::ParamSet> with_zero, disabled;
  cfg.epochs_update = 0;
  method::run_joco(p, 12, cfg, AblationFlags{}, 5,
                   [&](const JocoModels& m, const method::History&, const tr::TrState&) {
                     with_zero.push_back(m.params);
                   });
  cfg.epochs_update = 1;
  AblationFlags flags;
  flags.update_models = false;
  method::run_joco(p, 12, cfg, flags, 5,
                   [&](const JocoModels& m, const method::History&, const tr::TrState&) {
                     disabled.push_back(m.params);
                   });
  REQUIRE(with_zero.size() == disabled.size());
  REQUIRE(with_zero.size() == 10);
  for (std::size_t i = 0; i < with_zero.size(); ++i)
    CHECK(with_zero[i].same_values(disabled[i]));
  CHECK(with_zero.front().same_values(with_zero.back()));
}

TEST_CASE("every ablation runs to budget") {
  problems::RosenbrockComposite p;
  TrainConfig cfg = quick_config();
  cfg.n_sample = 64;
  cfg.k_mc = 4;
  std::vector<AblationFlags> variants(6);
  variants[1].joint_training = false;
  variants[2].use_trust_region = false;
  variants[3].outcome_uncertainty = false;
  variants[4].reward_uncertainty = false;
  variants[5].acquisition = method::Acquisition::kMcEi;
  for (const auto& flags : variants) {
    const method::History h = method::run_joco(p, 10, cfg, flags, 2);
    CHECK(h.error.empty());
    CHECK(h.size() == 10);
  }
}
