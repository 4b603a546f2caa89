#include "iterfac/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "iterfac/special.hpp"

namespace iterfac {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

PosteriorStats prior_only_stats(double sparsity, double rate) {
  PosteriorStats st;
  st.mean = sparsity / rate;
  st.second_moment = 2.0 * sparsity / (rate * rate);
  st.derivative = 0.0;
  return st;
}
}  // namespace

PosteriorStats gaussian_posterior(double prior_mean, double prior_var, double scale,
                                  double noise_var, double p) {
  if (!(noise_var > 0.0)) throw std::invalid_argument("gaussian_posterior: noise_var must be > 0");
  if (!(prior_var >= 0.0)) throw std::invalid_argument("gaussian_posterior: prior_var must be >= 0");
  const double denom = scale * scale * prior_var + noise_var;
  const double gain = scale * prior_var / denom;
  PosteriorStats st;
  st.mean = prior_mean + gain * (p - scale * prior_mean);
  const double var = prior_var * noise_var / denom;
  st.second_moment = var + st.mean * st.mean;
  st.derivative = gain;
  return st;
}

PosteriorStats bernoulli_exp_posterior(double sparsity, double rate, double scale,
                                       double noise_var, double p) {
  if (!(noise_var > 0.0))
    throw std::invalid_argument("bernoulli_exp_posterior: noise_var must be > 0");
  if (!(sparsity >= 0.0 && sparsity <= 1.0))
    throw std::invalid_argument("bernoulli_exp_posterior: sparsity must be in [0, 1]");
  if (!(rate > 0.0)) throw std::invalid_argument("bernoulli_exp_posterior: rate must be > 0");

  if (sparsity == 0.0) return {};  // prior is delta_0

  const double sigma = std::sqrt(noise_var);
  // Uninformative channel: posterior equals the prior. The closed form below
  // degrades numerically for |scale| near zero (rate*sigma/scale blows up), so
  // small scales are folded into this branch; the error is O(scale).
  if (std::abs(scale) <= 1e-10 * std::max(1.0, rate * sigma))
    return prior_only_stats(sparsity, rate);

  // Reflect to scale > 0; the Tweedie derivative below uses the signed scale.
  const double a = std::abs(scale);
  const double y = (scale < 0.0) ? -p : p;

  // Slab posterior is N(m, s^2) truncated to x > 0.
  const double s = sigma / a;
  const double m = y / a - rate * noise_var / (a * a);
  const double z = m / s;  // = y/sigma - rate*sigma/a

  // Slab probability from the log odds; z^2/2 + logPhi(z) is the stable kernel.
  double pi1 = 1.0;
  if (sparsity < 1.0) {
    const double log_odds = std::log(sparsity * rate / (1.0 - sparsity)) - std::log(a) +
                            std::log(sigma) + kLogSqrt2Pi + half_square_plus_logcdf(z);
    pi1 = std::exp(log_sigmoid(log_odds));
  }

  const double r = mills_inv(z);
  const double trunc_mean = std::max(0.0, m + s * r);
  const double trunc_m2 = std::max(trunc_mean * trunc_mean, m * m + s * s + m * s * r);

  PosteriorStats st;
  st.mean = pi1 * trunc_mean;
  st.second_moment = pi1 * trunc_m2;
  const double var = std::max(0.0, st.second_moment - st.mean * st.mean);
  st.derivative = scale * var / noise_var;
  return st;
}

PosteriorStats channel_posterior(const Prior& prior, double scale, double noise_var, double p) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior))
    return gaussian_posterior(g->mean, g->variance, scale, noise_var, p);
  if (const auto* b = std::get_if<BernoulliExpPrior>(&prior))
    return bernoulli_exp_posterior(b->sparsity, b->rate, scale, noise_var, p);
  const double c = std::get<PointMassPrior>(prior).value;
  return {c, c * c, 0.0};
}

DenoiserValue mmse_denoiser_bernoulli_exp(double sparsity, double rate, double scale,
                                          double noise_var, double p) {
  const PosteriorStats st = bernoulli_exp_posterior(sparsity, rate, scale, noise_var, p);
  return {st.mean, st.derivative};
}

}  // namespace iterfac
