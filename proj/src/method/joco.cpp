#include "joco/method/joco.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "joco/numgrad/adam.hpp"
#include "joco/util/error.hpp"

namespace joco::method {
namespace {

std::vector<double> row_vector(const ng::Tensor& m, std::size_t i) {
  return std::vector<double>(m.row(i), m.row(i) + m.cols());
}

ng::Tensor standardized_rewards(const Standardizer& s, const std::vector<double>& f) {
  ng::Tensor out(ng::Shape{f.size()});
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = s.apply(f[i]);
  return out;
}

bool all_finite(const ng::ParamSet& params) {
  for (const auto& e : params)
    if (!e.value.all_finite()) return false;
  return true;
}

// Runs `epochs` Adam steps on one loss part over the listed entries.
void train(JocoModels& m, const Batch& b, LossPart part,
           std::vector<std::size_t> indices, std::size_t epochs, double lr) {
  if (epochs == 0) return;
  ng::AdamConfig acfg;
  acfg.learning_rate = lr;
  ng::Adam adam(m.params, std::move(indices), acfg);
  for (std::size_t e = 0; e < epochs; ++e) {
    try {
      ng::value_and_grad(m.params, [&](ng::Graph& g) { return joco_loss(g, m, b, part); });
    } catch (const NumericalError& err) {
      if (std::strcmp(err.what(), "numerical overflow in graph") == 0) {
        throw NumericalError("training diverged");
      }
      throw;
    }
    adam.step(m.params);
    m.clamp_noise();
    if (!all_finite(m.params)) throw NumericalError("training diverged");
  }
}

void train_all(JocoModels& m, const Batch& b, std::size_t epochs, double lr,
               const AblationFlags& flags) {
  if (flags.joint_training) {
    std::vector<std::size_t> all(m.params.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    train(m, b, LossPart::kBoth, std::move(all), epochs, lr);
  } else {
    train(m, b, LossPart::kOutcome, m.outcome_indices(), epochs, lr);
    train(m, b, LossPart::kReward, m.reward_indices(), epochs, lr);
  }
}

ng::Tensor encode_candidates(const JocoModels& m, const ng::Tensor& candidates) {
  return m.e_x.forward(m.params, candidates);
}

}  // namespace

Architecture Architecture::for_problem(const problems::Problem& p) {
  const std::size_t d = p.d(), m = p.m();
  Architecture a;
  const std::size_t hidden = std::max<std::size_t>(d / 2, 1);
  a.ex_widths = {d, hidden, hidden, std::min<std::size_t>(16, d)};
  if (p.name() == "rover") {
    a.ey_widths = {m, 256, 128, 32};
  } else if (p.name() == "langermann") {
    a.ey_widths = {m, 32, 8};
  } else if (p.name() == "rosenbrock" || p.name() == "environmental") {
    a.ey_widths = {m, m, 8};
  } else {
    a.ey_widths = {m, std::max<std::size_t>(m / 2, 8), 8};
  }
  return a;
}

JocoModels JocoModels::create(const Architecture& arch, util::Rng& init_rng) {
  JocoModels m;
  m.e_x = models::MlpEncoder("ex.", arch.ex_widths);
  m.e_y = models::MlpEncoder("ey.", arch.ey_widths);
  m.e_x.add_params(m.params, init_rng);
  m.e_y.add_params(m.params, init_rng);
  for (std::size_t j = 0; j < m.heads(); ++j) {
    models::add_gp_params(m.params, head_prefix(j),
                          models::GpHyperparams::defaults(m.e_x.out_dim()));
  }
  models::add_gp_params(m.params, kRewardPrefix,
                        models::GpHyperparams::defaults(m.e_y.out_dim()));
  m.y_norm.mean.assign(m.e_y.in_dim(), 0.0);
  m.y_norm.scale.assign(m.e_y.in_dim(), 1.0);
  return m;
}

std::string JocoModels::head_prefix(std::size_t j) { return "h" + std::to_string(j) + "."; }

std::vector<std::size_t> JocoModels::outcome_indices() const {
  std::vector<std::string> prefixes = {"ex."};
  for (std::size_t j = 0; j < heads(); ++j) prefixes.push_back(head_prefix(j));
  return params.select(prefixes);
}

std::vector<std::size_t> JocoModels::reward_indices() const {
  return params.select({"ey.", kRewardPrefix});
}

void JocoModels::clamp_noise() {
  for (std::size_t j = 0; j < heads(); ++j) models::clamp_noise(params, head_prefix(j));
  models::clamp_noise(params, kRewardPrefix);
}

Batch make_batch(const problems::Problem& p, const History& h, std::size_t first) {
  return {unit_inputs(p, h, first), outputs(h, first), rewards(h, first)};
}

Batch recent_batch(const problems::Problem& p, const History& h, std::size_t n_b) {
  const std::size_t n = std::min(n_b, h.size());
  return make_batch(p, h, h.size() - n);
}

ng::Var joco_loss(ng::Graph& g, JocoModels& m, const Batch& b, LossPart part) {
  if (b.size() == 0) throw std::invalid_argument("joco_loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(b.size());
  ng::Var y_hat = m.e_y.forward(g, m.params, g.constant(m.y_norm.apply(b.y)));
  ng::Var total;
  if (part != LossPart::kReward) {
    ng::Var x_hat = m.e_x.forward(g, m.params, g.constant(b.x));
    std::vector<models::GpVars> heads;
    for (std::size_t j = 0; j < m.heads(); ++j)
      heads.push_back(models::bind_gp(g, m.params, JocoModels::head_prefix(j)));
    total = models::multioutput_mll(g, heads, x_hat, y_hat);
  }
  if (part != LossPart::kOutcome) {
    ng::Var reward = models::gp_mll(g, models::bind_gp(g, m.params, JocoModels::kRewardPrefix),
                                    y_hat, g.constant(standardized_rewards(m.f_norm, b.f)));
    total = total.valid() ? g.add(total, reward) : reward;
  }
  return g.scale(total, -inv_n);
}

double joco_loss(JocoModels& m, const Batch& b, LossPart part) {
  ng::Graph g;
  return g.value(joco_loss(g, m, b, part)).item();
}

void fit_initial(JocoModels& m, const Batch& data, const TrainConfig& cfg,
                 const AblationFlags& flags) {
  if (data.size() < 2) throw std::invalid_argument("fit_initial needs at least two records");
  train_all(m, data, cfg.epochs_init, cfg.learning_rate, flags);
}

void update_step(JocoModels& m, const Batch& batch, const TrainConfig& cfg,
                 const AblationFlags& flags) {
  if (!flags.update_models) return;
  if (batch.size() == 0) throw std::invalid_argument("update_step needs data");
  train_all(m, batch, cfg.epochs_update, cfg.learning_rate, flags);
}

Surrogate fit_surrogate(const JocoModels& m, const Batch& all) {
  const ng::Tensor x_hat = m.e_x.forward(m.params, all.x);
  const ng::Tensor y_hat = m.e_y.forward(m.params, m.y_norm.apply(all.y));
  Surrogate s{{}, models::FittedGp({models::read_gp_params(m.params, JocoModels::kRewardPrefix),
                                    y_hat, standardized_rewards(m.f_norm, all.f)})};
  for (std::size_t j = 0; j < m.heads(); ++j) {
    ng::Tensor col(ng::Shape{all.size()});
    for (std::size_t i = 0; i < all.size(); ++i) col[i] = y_hat(i, j);
    s.heads.emplace_back(models::ExactGp{
        models::read_gp_params(m.params, JocoModels::head_prefix(j)), x_hat, std::move(col)});
  }
  return s;
}

std::size_t thompson_choose(const JocoModels& m, const Surrogate& s,
                            const ng::Tensor& candidates, const AblationFlags& flags,
                            util::Rng& draws) {
  if (candidates.rows() == 1) return 0;
  const ng::Tensor x_hat = encode_candidates(m, candidates);
  const ng::Tensor outcome = flags.outcome_uncertainty
                                 ? models::sample_heads(s.heads, x_hat, draws)
                                 : models::mean_heads(s.heads, x_hat);
  const ng::Tensor reward =
      flags.reward_uncertainty
          ? models::posterior_joint_sample(s.reward.posterior(outcome), draws)
          : s.reward.posterior_mean(outcome);
  return argmax_first(reward.values());
}

std::vector<double> thompson_sample(const JocoModels& m, const Surrogate& s,
                                    const tr::Box& box, std::size_t n_sample,
                                    const AblationFlags& flags, util::Rng& candidates,
                                    util::Rng& draws) {
  if (n_sample == 0) throw std::invalid_argument("n_sample must be positive");
  const ng::Tensor c = uniform_in_box(box, n_sample, candidates);
  return row_vector(c, thompson_choose(m, s, c, flags, draws));
}

std::size_t mc_ei_choose(const JocoModels& m, const Surrogate& s,
                         const ng::Tensor& candidates, double f_best, std::size_t k_mc,
                         const AblationFlags& flags, util::Rng& draws) {
  if (k_mc == 0) throw std::invalid_argument("k_mc must be positive");
  const std::size_t q = candidates.rows(), heads = s.heads.size();
  const ng::Tensor x_hat = encode_candidates(m, candidates);
  std::vector<ng::Tensor> h_mean(heads), h_var(heads);
  for (std::size_t j = 0; j < heads; ++j) s.heads[j].posterior_marginal(x_hat, h_mean[j], h_var[j]);

  ng::Tensor outcome(ng::Shape{q * k_mc, heads});
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t k = 0; k < k_mc; ++k) {
      double* r = outcome.row(i * k_mc + k);
      for (std::size_t j = 0; j < heads; ++j) {
        r[j] = h_mean[j][i];
        if (flags.outcome_uncertainty) r[j] += std::sqrt(h_var[j][i]) * draws.normal();
      }
    }
  }
  ng::Tensor f_mean, f_var;
  s.reward.posterior_marginal(outcome, f_mean, f_var);
  std::vector<double> score(q, 0.0);
  for (std::size_t i = 0; i < q; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < k_mc; ++k) {
      const std::size_t r = i * k_mc + k;
      double z = f_mean[r];
      if (flags.reward_uncertainty) z += std::sqrt(f_var[r]) * draws.normal();
      total += std::max(m.f_norm.invert(z) - f_best, 0.0);
    }
    score[i] = total / static_cast<double>(k_mc);
  }
  return argmax_first(score);
}

std::vector<double> mc_ei_select(const JocoModels& m, const Surrogate& s,
                                 const tr::Box& box, std::size_t n_sample,
                                 double f_best, std::size_t k_mc,
                                 const AblationFlags& flags, util::Rng& candidates,
                                 util::Rng& draws) {
  if (n_sample == 0) throw std::invalid_argument("n_sample must be positive");
  const ng::Tensor c = uniform_in_box(box, n_sample, candidates);
  return row_vector(c, mc_ei_choose(m, s, c, f_best, k_mc, flags, draws));
}

History run_joco(const problems::Problem& problem, std::size_t budget,
                 const TrainConfig& cfg, const AblationFlags& flags, std::uint64_t seed,
                 const JocoHook& hook) {
  cfg.validate();
  const std::size_t n_init = cfg.n_init(budget);
  if (budget < n_init + 1) {
    throw std::invalid_argument("budget must exceed the initialization size");
  }
  History h;
  Evaluator eval(problem, h);
  try {
    const ng::Tensor init = initial_design(problem.d(), n_init, seed);
    for (std::size_t i = 0; i < n_init; ++i) eval.evaluate_unit(row_vector(init, i));

    auto init_rng = util::Rng::stream(seed, util::StreamTag::kModelInit);
    JocoModels m = JocoModels::create(Architecture::for_problem(problem), init_rng);
    m.y_norm = ColumnStandardizer::fit(outputs(h));
    m.f_norm = Standardizer::fit(rewards(h));
    fit_initial(m, make_batch(problem, h), cfg, flags);

    const tr::TrConfig tcfg = tr::TrConfig::for_dim(problem.d());
    tr::TrState state = tr::TrState::initial(row_vector(init, h.best_index()), tcfg);
    auto cand_rng = util::Rng::stream(seed, util::StreamTag::kCandidates);
    auto draw_rng = util::Rng::stream(seed, util::StreamTag::kPosteriorDraws);

    while (h.size() < budget) {
      const tr::Box box = flags.use_trust_region ? tr::tr_bounds(state) : unit_box(problem.d());
      const Surrogate s = fit_surrogate(m, make_batch(problem, h));
      const double f_prev = h.best();
      const std::vector<double> u =
          flags.acquisition == Acquisition::kThompson
              ? thompson_sample(m, s, box, cfg.n_sample, flags, cand_rng, draw_rng)
              : mc_ei_select(m, s, box, cfg.n_sample, f_prev, cfg.k_mc, flags, cand_rng,
                             draw_rng);
      const double f_new = eval.evaluate_unit(u).f;
      state = tr::tr_update(state, f_new, f_prev, u, tcfg);
      m.f_norm = Standardizer::fit(rewards(h));
      update_step(m, recent_batch(problem, h, cfg.n_b), cfg, flags);
      if (hook) hook(m, h, state);
    }
  } catch (const NumericalError& e) {
    h.error = e.what();
  }
  return h;
}

}  // namespace joco::method
