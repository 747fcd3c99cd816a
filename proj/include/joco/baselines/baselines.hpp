#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "joco/method/joco.hpp"

namespace joco::baselines {

enum class Method { kJoco, kRandom, kVanillaBo, kTurbo };

/// A method and, for JoCo only, its ablation switches.
struct MethodSpec {
  Method name = Method::kJoco;
  method::AblationFlags flags;
};

std::string_view method_name(Method m);
/// Names accepted by parse_method, in a fixed order.
std::vector<std::string> method_names();
/// Throws std::invalid_argument "unknown method: <name>".
Method parse_method(std::string_view name);

/// Candidate count vanilla BO uses unless overridden.
inline constexpr std::size_t kVanillaSamples = 4096;

/// `budget` independent uniform draws over the domain.
method::History run_random(const problems::Problem& problem, std::size_t budget,
                           std::uint64_t seed);

/// Deep-kernel model of f on x: the JoCo input encoder feeding one exact GP,
/// trained on the JoCo schedule.
struct DeepKernelModel {
  models::MlpEncoder encoder;
  ng::ParamSet params;
  method::Standardizer f_norm;

  static constexpr const char* kGpPrefix = "g.";
  static DeepKernelModel create(const problems::Problem& p, util::Rng& init_rng);
};

/// -(1/n) log p(f_std | E_X(x)).
ng::Var deep_kernel_loss(ng::Graph& g, DeepKernelModel& m, const method::Batch& b);
double deep_kernel_loss(DeepKernelModel& m, const method::Batch& b);

/// `epochs` Adam steps with fresh optimizer state.
void train_deep_kernel(DeepKernelModel& m, const method::Batch& b, std::size_t epochs,
                       double learning_rate);

/// One joint posterior draw of f over the candidates; returns the argmax row.
std::size_t deep_kernel_thompson(const DeepKernelModel& m, const method::Batch& all,
                                 const ng::Tensor& candidates, util::Rng& draws);

using DeepKernelHook = std::function<void(const DeepKernelModel&, const method::History&)>;

/// Thompson sampling over cfg.n_sample uniform candidates from the whole domain.
method::History run_vanilla_bo(const problems::Problem& problem, std::size_t budget,
                               const method::TrainConfig& cfg, std::uint64_t seed,
                               const DeepKernelHook& hook = {});

/// As run_vanilla_bo with candidates restricted to the trust region box.
method::History run_turbo(const problems::Problem& problem, std::size_t budget,
                          const method::TrainConfig& cfg, std::uint64_t seed,
                          const DeepKernelHook& hook = {});

/// Dispatches on spec.name.
method::History run_method(const MethodSpec& spec, const problems::Problem& problem,
                           std::size_t budget, const method::TrainConfig& cfg,
                           std::uint64_t seed);

}  // namespace joco::baselines
