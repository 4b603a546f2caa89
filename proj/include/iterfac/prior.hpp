#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <variant>

namespace iterfac {

// Scalar priors on the components of the rank-one factors.
struct GaussianPrior {
  double mean = 0.0;
  double variance = 1.0;
};

// Spike-and-slab: 0 w.p. 1-sparsity, Exp(rate) w.p. sparsity.
struct BernoulliExpPrior {
  double sparsity = 0.1;
  double rate = 1.0;
};

struct PointMassPrior {
  double value = 0.0;
};

using Prior = std::variant<GaussianPrior, BernoulliExpPrior, PointMassPrior>;

struct PriorMoments {
  double mean;
  double second_moment;
};

void validate(const Prior& prior);  // throws std::invalid_argument

PriorMoments prior_moments(const Prior& prior);
double prior_mean(const Prior& prior);
double prior_second_moment(const Prior& prior);
double prior_variance(const Prior& prior);

// i.i.d. draws, deterministic in the seed.
Eigen::VectorXd sample_prior(const Prior& prior, Eigen::Index count, std::uint64_t seed);

std::string describe(const Prior& prior);

}  // namespace iterfac
