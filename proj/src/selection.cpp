#include "iterfac/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iterfac {

SelectionRule SelectionRule::linear(FactorSide side) { return {LinearRule{}, side}; }

SelectionRule SelectionRule::mmse(const Prior& prior, FactorSide side) {
  validate(prior);
  return {MmseRule{prior, MmseChannel{}}, side};
}

SelectionRule SelectionRule::prox(const ScalarCost& cost, FactorSide side) {
  validate(cost);
  return {ProxRule{cost}, side};
}

void SelectionRule::set_channel(double scale, double noise_var) {
  std::get<MmseRule>(kind).channel = {scale, noise_var};
}

namespace {
PosteriorStats mmse_stats(const MmseRule& rule, double p) {
  const MmseChannel& ch = rule.channel;
  if (!(ch.noise_var > 0.0)) {
    // Degenerate channel (e.g. zero current iterate): posterior is the prior.
    const PriorMoments m = prior_moments(rule.prior);
    return {m.mean, m.second_moment, 0.0};
  }
  return channel_posterior(rule.prior, ch.scale, ch.noise_var, p);
}
}  // namespace

double select(const SelectionRule& rule, int /*t*/, double p, double lambda) {
  if (rule.is_linear()) return lambda * p;
  if (rule.is_prox()) return prox(rule.prox_cost(), p, lambda);
  return mmse_stats(std::get<MmseRule>(rule.kind), p).mean;
}

double select_derivative(const SelectionRule& rule, int /*t*/, double p, double lambda) {
  if (rule.is_linear()) return lambda;
  if (rule.is_prox()) return prox_derivative(rule.prox_cost(), p, lambda);
  return mmse_stats(std::get<MmseRule>(rule.kind), p).derivative;
}

double lipschitz_constant(const SelectionRule& rule, double lambda) {
  if (rule.is_linear()) return std::abs(lambda);
  if (rule.is_prox()) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lipschitz_constant: lambda must be > 0 for prox");
    return 1.0 / lambda;  // prox of a convex cost is nonexpansive in p
  }
  const auto& mm = std::get<MmseRule>(rule.kind);
  const MmseChannel& ch = mm.channel;
  if (!(ch.noise_var > 0.0)) return 0.0;
  if (const auto* g = std::get_if<GaussianPrior>(&mm.prior))
    return std::abs(ch.scale) * g->variance / (ch.scale * ch.scale * g->variance + ch.noise_var);
  if (std::holds_alternative<PointMassPrior>(mm.prior)) return 0.0;
  // Spike-and-slab: sup |dG/dp| estimated on a grid spanning the channel's output range.
  const PriorMoments m = prior_moments(mm.prior);
  const double spread = std::abs(ch.scale) * (std::sqrt(m.second_moment) + 8.0) +
                        8.0 * std::sqrt(ch.noise_var);
  double sup = 0.0;
  const int kGrid = 2001;
  for (int i = 0; i < kGrid; ++i) {
    const double p = -spread + 2.0 * spread * i / (kGrid - 1);
    sup = std::max(sup, std::abs(select_derivative(rule, 0, p, lambda)));
  }
  return sup;
}

LambdaPhi phi_constant(double c) {
  return {[c](double, double) { return c; }, 2, "const:" + std::to_string(c)};
}

LambdaPhi phi_second_moment(double coefficient) {
  return {[coefficient](double, double x) { return coefficient * x * x; }, 2,
          "second_moment:" + std::to_string(coefficient)};
}

double lambda_descent(double mu, double norm_sq_over_m) { return mu + norm_sq_over_m; }

double lambda_analysis(const LambdaPhi& phi, const Eigen::VectorXd& truth,
                       const Eigen::VectorXd& estimate) {
  if (!phi.fn) throw std::invalid_argument("lambda_analysis: missing phi callback");
  if (truth.size() != estimate.size() || truth.size() == 0)
    throw std::invalid_argument("lambda_analysis: vector length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) acc += phi.fn(truth[i], estimate[i]);
  return acc / static_cast<double>(truth.size());
}

}  // namespace iterfac
