#pragma once

#include "iterfac/prior.hpp"

namespace iterfac {

// Posterior summary of X given the observation p = scale * X + N(0, noise_var).
struct PosteriorStats {
  double mean = 0.0;
  double second_moment = 0.0;
  double derivative = 0.0;  // d(mean)/dp = scale * Var(X|p) / noise_var
  double variance() const { return second_moment - mean * mean; }
};

// Gaussian prior N(prior_mean, prior_var): closed-form linear posterior.
PosteriorStats gaussian_posterior(double prior_mean, double prior_var, double scale,
                                  double noise_var, double p);

// Spike-and-slab (1-sparsity) delta_0 + sparsity * Exp(rate): closed form via
// Gaussian CDF / Mills-ratio expressions, stable in both weight tails.
PosteriorStats bernoulli_exp_posterior(double sparsity, double rate, double scale,
                                       double noise_var, double p);

// Posterior under an arbitrary supported prior (dispatch on the variant).
PosteriorStats channel_posterior(const Prior& prior, double scale, double noise_var, double p);

// Spec surface: (mean, derivative) pair for the spike-and-slab denoiser.
struct DenoiserValue {
  double mean;
  double derivative;
};
DenoiserValue mmse_denoiser_bernoulli_exp(double sparsity, double rate, double scale,
                                          double noise_var, double p);

}  // namespace iterfac
