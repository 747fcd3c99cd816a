#include "joco/baselines/baselines.hpp"

#include <cstring>
#include <stdexcept>

#include "joco/numgrad/adam.hpp"
#include "joco/util/error.hpp"

namespace joco::baselines {
namespace {

constexpr Method kMethods[] = {Method::kJoco, Method::kRandom, Method::kVanillaBo,
                               Method::kTurbo};

ng::Tensor standardized(const method::Standardizer& s, const std::vector<double>& f) {
  ng::Tensor out(ng::Shape{f.size()});
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = s.apply(f[i]);
  return out;
}

std::vector<double> row_vector(const ng::Tensor& m, std::size_t i) {
  return std::vector<double>(m.row(i), m.row(i) + m.cols());
}

method::History run_deep_kernel(const problems::Problem& problem, std::size_t budget,
                                const method::TrainConfig& cfg, std::uint64_t seed,
                                bool trust_region, const DeepKernelHook& hook) {
  cfg.validate();
  const std::size_t n_init = cfg.n_init(budget);
  if (budget < n_init + 1) {
    throw std::invalid_argument("budget must exceed the initialization size");
  }
  method::History h;
  method::Evaluator eval(problem, h);
  try {
    const ng::Tensor init = method::initial_design(problem.d(), n_init, seed);
    for (std::size_t i = 0; i < n_init; ++i) eval.evaluate_unit(row_vector(init, i));

    auto init_rng = util::Rng::stream(seed, util::StreamTag::kModelInit);
    DeepKernelModel m = DeepKernelModel::create(problem, init_rng);
    m.f_norm = method::Standardizer::fit(method::rewards(h));
    train_deep_kernel(m, method::make_batch(problem, h), cfg.epochs_init, cfg.learning_rate);

    const tr::TrConfig tcfg = tr::TrConfig::for_dim(problem.d());
    tr::TrState state = tr::TrState::initial(row_vector(init, h.best_index()), tcfg);
    auto cand_rng = util::Rng::stream(seed, util::StreamTag::kCandidates);
    auto draw_rng = util::Rng::stream(seed, util::StreamTag::kPosteriorDraws);

    while (h.size() < budget) {
      const tr::Box box = trust_region ? tr::tr_bounds(state) : method::unit_box(problem.d());
      const ng::Tensor cand = method::uniform_in_box(box, cfg.n_sample, cand_rng);
      const std::size_t pick =
          deep_kernel_thompson(m, method::make_batch(problem, h), cand, draw_rng);
      const double f_prev = h.best();
      const std::vector<double> u = row_vector(cand, pick);
      const double f_new = eval.evaluate_unit(u).f;
      if (trust_region) state = tr::tr_update(state, f_new, f_prev, u, tcfg);
      m.f_norm = method::Standardizer::fit(method::rewards(h));
      train_deep_kernel(m, method::recent_batch(problem, h, cfg.n_b), cfg.epochs_update,
                        cfg.learning_rate);
      if (hook) hook(m, h);
    }
  } catch (const NumericalError& e) {
    h.error = e.what();
  }
  return h;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kJoco: return "joco";
    case Method::kRandom: return "random";
    case Method::kVanillaBo: return "vanilla_bo";
    case Method::kTurbo: return "turbo";
  }
  return "?";
}

std::vector<std::string> method_names() {
  std::vector<std::string> out;
  for (Method m : kMethods) out.emplace_back(method_name(m));
  return out;
}

Method parse_method(std::string_view name) {
  for (Method m : kMethods)
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

method::History run_random(const problems::Problem& problem, std::size_t budget,
                           std::uint64_t seed) {
  if (budget == 0) throw std::invalid_argument("budget must be positive");
  method::History h;
  method::Evaluator eval(problem, h);
  auto rng = util::Rng::stream(seed, util::StreamTag::kRandomSearch);
  std::vector<double> u(problem.d());
  for (std::size_t i = 0; i < budget; ++i) {
    for (double& v : u) v = rng.uniform();
    eval.evaluate_unit(u);
  }
  return h;
}

DeepKernelModel DeepKernelModel::create(const problems::Problem& p, util::Rng& init_rng) {
  DeepKernelModel m;
  m.encoder = models::MlpEncoder("ex.", method::Architecture::for_problem(p).ex_widths);
  m.encoder.add_params(m.params, init_rng);
  models::add_gp_params(m.params, kGpPrefix,
                        models::GpHyperparams::defaults(m.encoder.out_dim()));
  return m;
}

ng::Var deep_kernel_loss(ng::Graph& g, DeepKernelModel& m, const method::Batch& b) {
  if (b.size() == 0) throw std::invalid_argument("deep_kernel_loss: empty batch");
  ng::Var x_hat = m.encoder.forward(g, m.params, g.constant(b.x));
  ng::Var mll = models::gp_mll(g, models::bind_gp(g, m.params, DeepKernelModel::kGpPrefix),
                               x_hat, g.constant(standardized(m.f_norm, b.f)));
  return g.scale(mll, -1.0 / static_cast<double>(b.size()));
}

double deep_kernel_loss(DeepKernelModel& m, const method::Batch& b) {
  ng::Graph g;
  return g.value(deep_kernel_loss(g, m, b)).item();
}

void train_deep_kernel(DeepKernelModel& m, const method::Batch& b, std::size_t epochs,
                       double learning_rate) {
  if (epochs == 0) return;
  ng::AdamConfig acfg;
  acfg.learning_rate = learning_rate;
  ng::Adam adam(m.params, acfg);
  for (std::size_t e = 0; e < epochs; ++e) {
    try {
      ng::value_and_grad(m.params, [&](ng::Graph& g) { return deep_kernel_loss(g, m, b); });
    } catch (const NumericalError& err) {
      if (std::strcmp(err.what(), "numerical overflow in graph") == 0) {
        throw NumericalError("training diverged");
      }
      throw;
    }
    adam.step(m.params);
    models::clamp_noise(m.params, DeepKernelModel::kGpPrefix);
    for (const auto& p : m.params)
      if (!p.value.all_finite()) throw NumericalError("training diverged");
  }
}

std::size_t deep_kernel_thompson(const DeepKernelModel& m, const method::Batch& all,
                                 const ng::Tensor& candidates, util::Rng& draws) {
  if (candidates.rows() == 0) throw std::invalid_argument("n_sample must be positive");
  if (candidates.rows() == 1) return 0;
  const models::FittedGp gp(
      {models::read_gp_params(m.params, DeepKernelModel::kGpPrefix),
       m.encoder.forward(m.params, all.x), standardized(m.f_norm, all.f)});
  const ng::Tensor f = models::posterior_joint_sample(
      gp.posterior(m.encoder.forward(m.params, candidates)), draws);
  return method::argmax_first(f.values());
}

method::History run_vanilla_bo(const problems::Problem& problem, std::size_t budget,
                               const method::TrainConfig& cfg, std::uint64_t seed,
                               const DeepKernelHook& hook) {
  return run_deep_kernel(problem, budget, cfg, seed, false, hook);
}

method::History run_turbo(const problems::Problem& problem, std::size_t budget,
                          const method::TrainConfig& cfg, std::uint64_t seed,
                          const DeepKernelHook& hook) {
  return run_deep_kernel(problem, budget, cfg, seed, true, hook);
}

method::History run_method(const MethodSpec& spec, const problems::Problem& problem,
                           std::size_t budget, const method::TrainConfig& cfg,
                           std::uint64_t seed) {
  switch (spec.name) {
    case Method::kJoco: return method::run_joco(problem, budget, cfg, spec.flags, seed);
    case Method::kRandom: return run_random(problem, budget, seed);
    case Method::kVanillaBo: return run_vanilla_bo(problem, budget, cfg, seed);
    case Method::kTurbo: return run_turbo(problem, budget, cfg, seed);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace joco::baselines
