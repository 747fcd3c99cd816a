#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "joco/method/design.hpp"
#include "joco/method/types.hpp"
#include "joco/models/gp.hpp"
#include "joco/models/mlp.hpp"
#include "joco/numgrad/graph.hpp"
#include "joco/numgrad/param_set.hpp"
#include "joco/problems/problem.hpp"
#include "joco/trustregion/trust_region.hpp"

namespace joco::method {

/// Encoder layer widths, input width first.
struct Architecture {
  std::vector<std::size_t> ex_widths;
  std::vector<std::size_t> ey_widths;

  /// E_X: d -> d/2 -> d/2 -> min(16, d). E_Y per problem: two layers into 8
  /// latent dims (hidden 18, 32 or 16), or 256 -> 128 -> 32 for the rover.
  static Architecture for_problem(const problems::Problem& p);
};

/// E_X, E_Y, the latent outcome GP heads and the reward GP, with every
/// trainable value in one ParamSet. Intermediate outputs are standardized per
/// column with constants fixed from the initial data; rewards with constants
/// refreshed from all observations.
struct JocoModels {
  models::MlpEncoder e_x;
  models::MlpEncoder e_y;
  ng::ParamSet params;
  ColumnStandardizer y_norm;
  Standardizer f_norm;

  static JocoModels create(const Architecture& arch, util::Rng& init_rng);

  std::size_t heads() const { return e_y.out_dim(); }
  static std::string head_prefix(std::size_t j);
  static constexpr const char* kRewardPrefix = "g.";

  /// Entry indices of E_X plus the outcome heads, and of E_Y plus the reward GP.
  std::vector<std::size_t> outcome_indices() const;
  std::vector<std::size_t> reward_indices() const;
  void clamp_noise();
};

/// Training inputs in model coordinates: unit-cube x, raw y and raw f.
struct Batch {
  ng::Tensor x;
  ng::Tensor y;
  std::vector<double> f;
  std::size_t size() const { return f.size(); }
};

/// Records [first, end) of the history.
Batch make_batch(const problems::Problem& p, const History& h, std::size_t first = 0);
/// The most recent min(n_b, |h|) records.
Batch recent_batch(const problems::Problem& p, const History& h, std::size_t n_b);

enum class LossPart { kBoth, kOutcome, kReward };

/// -(1/n) [ sum_j log p(E_Y(y)_j | E_X(x)) + log p(f_std | E_Y(y)) ]. E_Y(y)
/// is computed once and feeds both terms.
ng::Var joco_loss(ng::Graph& g, JocoModels& m, const Batch& b,
                  LossPart part = LossPart::kBoth);
double joco_loss(JocoModels& m, const Batch& b, LossPart part = LossPart::kBoth);

/// epochs_init full-batch Adam steps on the loss over `data`. With
/// joint_training off, E_X and the heads are fitted to the outcome term first,
/// then E_Y and the reward GP to the reward term.
void fit_initial(JocoModels& m, const Batch& data, const TrainConfig& cfg,
                 const AblationFlags& flags = {});

/// epochs_update Adam steps on `batch` with fresh optimizer state; a no-op
/// when flags.update_models is false.
void update_step(JocoModels& m, const Batch& batch, const TrainConfig& cfg,
                 const AblationFlags& flags);

/// Exact GPs conditioned on every observation under the current encoders.
struct Surrogate {
  std::vector<models::FittedGp> heads;
  models::FittedGp reward;
};
Surrogate fit_surrogate(const JocoModels& m, const Batch& all);

/// Two-stage Thompson choice among fixed candidates (unit cube rows): one
/// joint draw of the latent outcomes, then one joint draw of the standardized
/// reward at those outcomes. Posterior means replace draws when the matching
/// uncertainty flag is off. Returns the argmax row, lowest index on ties.
std::size_t thompson_choose(const JocoModels& m, const Surrogate& s,
                            const ng::Tensor& candidates, const AblationFlags& flags,
                            util::Rng& draws);

/// Draws n_sample uniform candidates in `box` and applies thompson_choose.
std::vector<double> thompson_sample(const JocoModels& m, const Surrogate& s,
                                    const tr::Box& box, std::size_t n_sample,
                                    const AblationFlags& flags, util::Rng& candidates,
                                    util::Rng& draws);

/// Monte-Carlo expected improvement over f_best with k_mc two-stage draws per
/// candidate from the per-candidate marginals.
std::size_t mc_ei_choose(const JocoModels& m, const Surrogate& s,
                         const ng::Tensor& candidates, double f_best, std::size_t k_mc,
                         const AblationFlags& flags, util::Rng& draws);
std::vector<double> mc_ei_select(const JocoModels& m, const Surrogate& s,
                                 const tr::Box& box, std::size_t n_sample,
                                 double f_best, std::size_t k_mc,
                                 const AblationFlags& flags, util::Rng& candidates,
                                 util::Rng& draws);

/// Called after every model-guided iteration.
using JocoHook = std::function<void(const JocoModels&, const History&, const tr::TrState&)>;

/// The full loop: Sobol initialization, initial fit, then select, evaluate,
/// trust-region update and model update until `budget` evaluations. A
/// numerical failure stops the run and is reported in History::error.
History run_joco(const problems::Problem& problem, std::size_t budget,
                 const TrainConfig& cfg, const AblationFlags& flags, std::uint64_t seed,
                 const JocoHook& hook = {});

}  // namespace joco::method
