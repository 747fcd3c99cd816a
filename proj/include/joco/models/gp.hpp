#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "joco/numgrad/graph.hpp"
#include "joco/numgrad/param_set.hpp"
#include "joco/numgrad/tensor.hpp"
#include "joco/util/rng.hpp"

namespace joco::models {

inline constexpr double kNoiseFloor = 1e-6;

/// Constant-mean RBF GP hyperparameters in log space.
struct GpHyperparams {
  ng::Tensor log_lengthscales;  // one per input dim
  double log_signal_var = 0.0;
  double log_noise_var = -4.605170185988091;  // log(1e-2)
  double mean = 0.0;

  static GpHyperparams defaults(std::size_t dim);

  /// Stores max(v, log(kNoiseFloor)).
  void set_log_noise_var(double v);
  double signal_var() const;
  /// Noise variance, never below kNoiseFloor.
  double noise_var() const;
  std::size_t dim() const { return log_lengthscales.size(); }
};

/// Parameter names used for a GP stored under `prefix`.
std::string lengthscale_name(const std::string& prefix);
std::string signal_name(const std::string& prefix);
std::string noise_name(const std::string& prefix);
std::string mean_name(const std::string& prefix);

void add_gp_params(ng::ParamSet& params, const std::string& prefix,
                   const GpHyperparams& init);
GpHyperparams read_gp_params(const ng::ParamSet& params,
                             const std::string& prefix);
/// Raises a log-noise entry that fell below the floor back onto it.
void clamp_noise(ng::ParamSet& params, const std::string& prefix);

/// Graph handles for one GP's hyperparameters.
struct GpVars {
  ng::Var log_ls, log_sf2, log_sn2, mean;
};

GpVars bind_gp(ng::Graph& g, ng::ParamSet& params, const std::string& prefix);
GpVars constant_gp(ng::Graph& g, const GpHyperparams& hyp);

/// K[i, j] = sf2 * exp(-0.5 * sum_k ((a_ik - b_jk) / l_k)^2).
ng::Var rbf_kernel(ng::Graph& g, const GpVars& h, ng::Var a, ng::Var b);
ng::Tensor rbf_kernel(const GpHyperparams& hyp, const ng::Tensor& a,
                      const ng::Tensor& b);

/// log N(y | c 1, K(x, x) + sn2 I).
ng::Var gp_mll(ng::Graph& g, const GpVars& h, ng::Var x, ng::Var y);

struct ExactGp {
  GpHyperparams hyp;
  ng::Tensor x;  // n x dim
  ng::Tensor y;  // n
};

double gp_mll(const ExactGp& gp);

/// Gaussian over latent function values at q query points.
struct PosteriorGaussian {
  ng::Tensor mean;  // q
  ng::Tensor cov;   // q x q
};

/// ExactGp with its training factorization cached, for repeated queries.
class FittedGp {
 public:
  explicit FittedGp(ExactGp gp);

  const ExactGp& gp() const { return gp_; }
  std::size_t size() const { return gp_.y.size(); }
  double jitter() const { return jitter_; }

  ng::Tensor posterior_mean(const ng::Tensor& q) const;
  /// Per-point mean and variance without the joint covariance.
  void posterior_marginal(const ng::Tensor& q, ng::Tensor& mean,
                          ng::Tensor& var) const;
  PosteriorGaussian posterior(const ng::Tensor& q) const;

 private:
  /// Rows of the result solve L w = k(x, q_i).
  ng::Tensor whitened_cross(const ng::Tensor& q) const;

  ExactGp gp_;
  ng::Tensor l_;      // Cholesky factor of K + sn2 I
  ng::Tensor a_;      // L^-1 (y - c)
  double jitter_ = 0.0;
};

PosteriorGaussian gp_posterior(const ExactGp& gp, const ng::Tensor& q);

/// mean + L eps with L the jittered Cholesky factor of cov and eps drawn from
/// `rng` in index order. Zero covariance returns the mean unchanged.
ng::Tensor posterior_joint_sample(const PosteriorGaussian& post, util::Rng& rng);

/// Independent heads over a shared training input matrix.
struct MultiOutputGp {
  std::vector<GpHyperparams> heads;
  ng::Tensor x;
};

/// Sum of per-head log likelihoods of the columns of `targets` (n x heads).
/// Terms are added in ascending order of value, so permuting heads together
/// with target columns leaves the result bitwise unchanged.
double multioutput_mll(const MultiOutputGp& mgp, const ng::Tensor& targets);
ng::Var multioutput_mll(ng::Graph& g, const std::vector<GpVars>& heads,
                        ng::Var x, ng::Var targets);

/// Posterior of every head at `q`, sampled jointly per head and returned as
/// a q x heads matrix. Heads draw from `rng` in index order.
ng::Tensor sample_heads(const std::vector<FittedGp>& heads, const ng::Tensor& q,
                        util::Rng& rng);
/// Posterior means of every head as a q x heads matrix.
ng::Tensor mean_heads(const std::vector<FittedGp>& heads, const ng::Tensor& q);

}  // namespace joco::models
