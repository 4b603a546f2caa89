#include "iterfac/prior.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

#include "iterfac/rng.hpp"

namespace iterfac {

void validate(const Prior& prior) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    if (!(g->variance > 0.0)) throw std::invalid_argument("gaussian prior: variance must be > 0");
    if (!std::isfinite(g->mean)) throw std::invalid_argument("gaussian prior: mean must be finite");
  } else if (const auto* b = std::get_if<BernoulliExpPrior>(&prior)) {
    if (!(b->sparsity > 0.0 && b->sparsity <= 1.0))
      throw std::invalid_argument("bernoulli_exp prior: sparsity must be in (0, 1]");
    if (!(b->rate > 0.0)) throw std::invalid_argument("bernoulli_exp prior: rate must be > 0");
  } else {
    const auto& p = std::get<PointMassPrior>(prior);
    if (!std::isfinite(p.value)) throw std::invalid_argument("point_mass prior: value must be finite");
  }
}

PriorMoments prior_moments(const Prior& prior) {
  validate(prior);
  if (const auto* g = std::get_if<GaussianPrior>(&prior))
    return {g->mean, g->variance + g->mean * g->mean};
  if (const auto* b = std::get_if<BernoulliExpPrior>(&prior))
    return {b->sparsity / b->rate, 2.0 * b->sparsity / (b->rate * b->rate)};
  const auto& p = std::get<PointMassPrior>(prior);
  return {p.value, p.value * p.value};
}

double prior_mean(const Prior& prior) { return prior_moments(prior).mean; }

double prior_second_moment(const Prior& prior) { return prior_moments(prior).second_moment; }

double prior_variance(const Prior& prior) {
  const PriorMoments m = prior_moments(prior);
  return m.second_moment - m.mean * m.mean;
}

Eigen::VectorXd sample_prior(const Prior& prior, Eigen::Index count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_prior: count must be >= 1");
  validate(prior);
  Eigen::VectorXd out(count);
  std::mt19937_64 eng = make_engine(seed);
  if (const auto* g = std::get_if<GaussianPrior>(&prior)) {
    std::normal_distribution<double> dist(g->mean, std::sqrt(g->variance));
    for (Eigen::Index i = 0; i < count; ++i) out[i] = dist(eng);
  } else if (const auto* b = std::get_if<BernoulliExpPrior>(&prior)) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::exponential_distribution<double> slab(b->rate);
    for (Eigen::Index i = 0; i < count; ++i)
      out[i] = (coin(eng) < b->sparsity) ? slab(eng) : 0.0;
  } else {
    out.setConstant(std::get<PointMassPrior>(prior).value);
  }
  return out;
}

std::string describe(const Prior& prior) {
  std::ostringstream os;
  if (const auto* g = std::get_if<GaussianPrior>(&prior))
    os << "gaussian(mean=" << g->mean << ", variance=" << g->variance << ")";
  else if (const auto* b = std::get_if<BernoulliExpPrior>(&prior))
    os << "bernoulli_exp(sparsity=" << b->sparsity << ", rate=" << b->rate << ")";
  else
    os << "point_mass(value=" << std::get<PointMassPrior>(prior).value << ")";
  return os.str();
}

}  // namespace iterfac
