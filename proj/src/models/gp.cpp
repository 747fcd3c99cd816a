#include "joco/models/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "joco/numgrad/linalg.hpp"
#include "joco/simd/kernels.hpp"
#include "joco/util/error.hpp"

namespace joco::models {
namespace {

const double kLogNoiseFloor = std::log(kNoiseFloor);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void check_inputs(const ng::Tensor& a, std::size_t dim, const char* what) {
  if (!a.is_matrix() || a.cols() != dim) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(dim) +
                     " columns, got " + ng::shape_string(a.shape()));
  }
}

ng::Tensor scaled_rows(const ng::Tensor& a, const std::vector<double>& inv_ls) {
  ng::Tensor z = a;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double* r = z.row(i);
    for (std::size_t k = 0; k < inv_ls.size(); ++k) r[k] *= inv_ls[k];
  }
  return z;
}

}  // namespace

GpHyperparams GpHyperparams::defaults(std::size_t dim) {
  GpHyperparams h;
  h.log_lengthscales = ng::Tensor(ng::Shape{dim});
  return h;
}

void GpHyperparams::set_log_noise_var(double v) {
  log_noise_var = std::max(v, kLogNoiseFloor);
}

double GpHyperparams::signal_var() const { return std::exp(log_signal_var); }

double GpHyperparams::noise_var() const {
  return std::max(std::exp(log_noise_var), kNoiseFloor);
}

std::string lengthscale_name(const std::string& prefix) { return prefix + "log_ls"; }
std::string signal_name(const std::string& prefix) { return prefix + "log_sf2"; }
std::string noise_name(const std::string& prefix) { return prefix + "log_sn2"; }
std::string mean_name(const std::string& prefix) { return prefix + "mean"; }

void add_gp_params(ng::ParamSet& params, const std::string& prefix,
                   const GpHyperparams& init) {
  params.add(lengthscale_name(prefix), init.log_lengthscales);
  params.add(signal_name(prefix), ng::Tensor::scalar(init.log_signal_var));
  params.add(noise_name(prefix),
             ng::Tensor::scalar(std::max(init.log_noise_var, kLogNoiseFloor)));
  params.add(mean_name(prefix), ng::Tensor::scalar(init.mean));
}

GpHyperparams read_gp_params(const ng::ParamSet& params,
                             const std::string& prefix) {
  GpHyperparams h;
  h.log_lengthscales = params.value(lengthscale_name(prefix));
  h.log_signal_var = params.value(signal_name(prefix)).item();
  h.set_log_noise_var(params.value(noise_name(prefix)).item());
  h.mean = params.value(mean_name(prefix)).item();
  return h;
}

void clamp_noise(ng::ParamSet& params, const std::string& prefix) {
  double& v = params.value(noise_name(prefix))[0];
  v = std::max(v, kLogNoiseFloor);
}

GpVars bind_gp(ng::Graph& g, ng::ParamSet& params, const std::string& prefix) {
  return {g.param(params, lengthscale_name(prefix)),
          g.param(params, signal_name(prefix)),
          g.param(params, noise_name(prefix)),
          g.param(params, mean_name(prefix))};
}

GpVars constant_gp(ng::Graph& g, const GpHyperparams& hyp) {
  return {g.constant(hyp.log_lengthscales), g.scalar(hyp.log_signal_var),
          g.scalar(std::max(hyp.log_noise_var, kLogNoiseFloor)),
          g.scalar(hyp.mean)};
}

ng::Var rbf_kernel(ng::Graph& g, const GpVars& h, ng::Var a, ng::Var b) {
  const std::size_t dim = g.value(h.log_ls).size();
  check_inputs(g.value(a), dim, "rbf_kernel");
  check_inputs(g.value(b), dim, "rbf_kernel");
  ng::Var inv_ls = g.exp(g.scale(h.log_ls, -1.0));
  ng::Var za = g.mul_rows(a, inv_ls);
  ng::Var zb = a.id == b.id ? za : g.mul_rows(b, inv_ls);
  ng::Var d = g.sqdist(za, zb);
  return g.exp(g.add_scalar(g.scale(d, -0.5), h.log_sf2));
}

ng::Tensor rbf_kernel(const GpHyperparams& hyp, const ng::Tensor& a,
                      const ng::Tensor& b) {
  const std::size_t dim = hyp.dim();
  check_inputs(a, dim, "rbf_kernel");
  check_inputs(b, dim, "rbf_kernel");
  std::vector<double> inv_ls(dim);
  for (std::size_t k = 0; k < dim; ++k) inv_ls[k] = std::exp(-hyp.log_lengthscales[k]);
  const ng::Tensor za = scaled_rows(a, inv_ls);
  // Scaled b stored column-major so the inner loop runs over contiguous j.
  const ng::Tensor zbt = ng::transpose(&a == &b ? za : scaled_rows(b, inv_ls));
  const std::size_t n = a.rows(), q = b.rows();
  ng::Tensor k(ng::Shape{n, q});
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = za.row(i);
    double* out = k.row(i);
    for (std::size_t c = 0; c < dim; ++c) {
      const double* bc = zbt.row(c);
      const double x = ai[c];
      for (std::size_t j = 0; j < q; ++j) {
        const double diff = x - bc[j];
        out[j] += diff * diff;
      }
    }
    for (std::size_t j = 0; j < q; ++j) out[j] = -0.5 * out[j] + hyp.log_signal_var;
  }
  simd::active().exp_inplace(k.size(), k.values().data());
  return k;
}

ng::Var gp_mll(ng::Graph& g, const GpVars& h, ng::Var x, ng::Var y) {
  const ng::Tensor& yv = g.value(y);
  if (!yv.is_vector() || yv.size() != g.value(x).rows() || yv.size() == 0) {
    throw ShapeError("gp_mll: targets must be a non-empty vector, one per input row");
  }
  const double n = static_cast<double>(yv.size());
  ng::Var k = rbf_kernel(g, h, x, x);
  ng::Var l = g.cholesky(g.add_diag(k, g.exp(h.log_sn2)));
  ng::Var a = g.solve_lower(l, g.add_scalar(y, g.scale(h.mean, -1.0)));
  ng::Var quad = g.scale(g.sum(g.mul(a, a)), -0.5);
  ng::Var logdet = g.scale(g.sum(g.log(g.diag(l))), -1.0);
  return g.add(g.add(quad, logdet), g.scalar(-0.5 * n * kLog2Pi));
}

double gp_mll(const ExactGp& gp) {
  ng::Graph g;
  return g.value(gp_mll(g, constant_gp(g, gp.hyp), g.constant(gp.x),
                        g.constant(gp.y)))
      .item();
}

FittedGp::FittedGp(ExactGp gp) : gp_(std::move(gp)) {
  const std::size_t n = gp_.y.size();
  if (n == 0) return;
  check_inputs(gp_.x, gp_.hyp.dim(), "FittedGp");
  if (gp_.x.rows() != n) throw ShapeError("FittedGp: one target per input row");
  ng::Tensor k = rbf_kernel(gp_.hyp, gp_.x, gp_.x);
  const double noise = gp_.hyp.noise_var();
  for (std::size_t i = 0; i < n; ++i) k(i, i) += noise;
  ng::CholeskyResult chol = ng::cholesky(k);
  l_ = std::move(chol.lower);
  jitter_ = chol.jitter;
  a_ = gp_.y;
  for (double& v : a_.values()) v -= gp_.hyp.mean;
  ng::forward_subst_rows(l_, a_);
}

ng::Tensor FittedGp::whitened_cross(const ng::Tensor& q) const {
  ng::Tensor w = rbf_kernel(gp_.hyp, q, gp_.x);
  ng::forward_subst_rows(l_, w);
  return w;
}

ng::Tensor FittedGp::posterior_mean(const ng::Tensor& q) const {
  check_inputs(q, gp_.hyp.dim(), "posterior");
  ng::Tensor mean(ng::Shape{q.rows()}, gp_.hyp.mean);
  if (size() == 0) return mean;
  const ng::Tensor w = whitened_cross(q);
  const auto& kern = simd::active();
  for (std::size_t i = 0; i < q.rows(); ++i)
    mean[i] += kern.dot(w.row(i), a_.values().data(), size());
  return mean;
}

void FittedGp::posterior_marginal(const ng::Tensor& q, ng::Tensor& mean,
                                  ng::Tensor& var) const {
  check_inputs(q, gp_.hyp.dim(), "posterior");
  mean = ng::Tensor(ng::Shape{q.rows()}, gp_.hyp.mean);
  var = ng::Tensor(ng::Shape{q.rows()}, gp_.hyp.signal_var());
  if (size() == 0) return;
  const ng::Tensor w = whitened_cross(q);
  const auto& kern = simd::active();
  for (std::size_t i = 0; i < q.rows(); ++i) {
    mean[i] += kern.dot(w.row(i), a_.values().data(), size());
    var[i] = std::max(var[i] - kern.dot(w.row(i), w.row(i), size()), 0.0);
  }
}

PosteriorGaussian FittedGp::posterior(const ng::Tensor& q) const {
  check_inputs(q, gp_.hyp.dim(), "posterior");
  PosteriorGaussian post;
  post.mean = ng::Tensor(ng::Shape{q.rows()}, gp_.hyp.mean);
  post.cov = rbf_kernel(gp_.hyp, q, q);
  if (size() == 0) return post;
  const ng::Tensor w = whitened_cross(q);
  const auto& kern = simd::active();
  for (std::size_t i = 0; i < q.rows(); ++i)
    post.mean[i] += kern.dot(w.row(i), a_.values().data(), size());
  ng::syrk_sub(post.cov, w);
  for (std::size_t i = 0; i < q.rows(); ++i)
    post.cov(i, i) = std::max(post.cov(i, i), 0.0);
  return post;
}

PosteriorGaussian gp_posterior(const ExactGp& gp, const ng::Tensor& q) {
  return FittedGp(gp).posterior(q);
}

ng::Tensor posterior_joint_sample(const PosteriorGaussian& post, util::Rng& rng) {
  const std::size_t q = post.mean.size();
  if (post.cov.rows() != q || post.cov.cols() != q) {
    throw ShapeError("posterior_joint_sample: covariance does not match mean");
  }
  ng::Tensor out = post.mean;
  if (post.cov.max_abs() == 0.0) return out;
  const ng::Tensor l = ng::cholesky(post.cov).lower;
  std::vector<double> eps(q);
  for (double& e : eps) e = rng.normal();
  const auto& kern = simd::active();
  for (std::size_t i = 0; i < q; ++i) out[i] += kern.dot(l.row(i), eps.data(), i + 1);
  return out;
}

double multioutput_mll(const MultiOutputGp& mgp, const ng::Tensor& targets) {
  if (!targets.is_matrix() || targets.cols() != mgp.heads.size() ||
      targets.rows() != mgp.x.rows()) {
    throw ShapeError("multioutput_mll: targets must be n x heads");
  }
  std::vector<double> terms;
  for (std::size_t j = 0; j < mgp.heads.size(); ++j) {
    ExactGp gp{mgp.heads[j], mgp.x, ng::Tensor(ng::Shape{targets.rows()})};
    for (std::size_t i = 0; i < targets.rows(); ++i) gp.y[i] = targets(i, j);
    terms.push_back(gp_mll(gp));
  }
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

ng::Var multioutput_mll(ng::Graph& g, const std::vector<GpVars>& heads,
                        ng::Var x, ng::Var targets) {
  const ng::Tensor& t = g.value(targets);
  if (heads.empty() || !t.is_matrix() || t.cols() != heads.size()) {
    throw ShapeError("multioutput_mll: targets must be n x heads");
  }
  std::vector<ng::Var> terms;
  for (std::size_t j = 0; j < heads.size(); ++j)
    terms.push_back(gp_mll(g, heads[j], x, g.column(targets, j)));
  std::stable_sort(terms.begin(), terms.end(), [&](ng::Var a, ng::Var b) {
    return g.value(a).item() < g.value(b).item();
  });
  ng::Var total = terms.front();
  for (std::size_t j = 1; j < terms.size(); ++j) total = g.add(total, terms[j]);
  return total;
}

ng::Tensor sample_heads(const std::vector<FittedGp>& heads, const ng::Tensor& q,
                        util::Rng& rng) {
  ng::Tensor out(ng::Shape{q.rows(), heads.size()});
  for (std::size_t j = 0; j < heads.size(); ++j) {
    const ng::Tensor s = posterior_joint_sample(heads[j].posterior(q), rng);
    for (std::size_t i = 0; i < q.rows(); ++i) out(i, j) = s[i];
  }
  return out;
}

ng::Tensor mean_heads(const std::vector<FittedGp>& heads, const ng::Tensor& q) {
  ng::Tensor out(ng::Shape{q.rows(), heads.size()});
  for (std::size_t j = 0; j < heads.size(); ++j) {
    const ng::Tensor m = heads[j].posterior_mean(q);
    for (std::size_t i = 0; i < q.rows(); ++i) out(i, j) = m[i];
  }
  return out;
}

}  // namespace joco::models
