#include "iterfac/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iterfac {

namespace {
double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void require_finite(double value, const char* integral, int t) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "se_step: nonfinite expectation '" << integral << "' at iteration " << t;
    throw std::runtime_error(os.str());
  }
}

// Copy a rule, loading the scalar-equivalent channel into posterior-mean rules.
SelectionRule rule_with_channel(const SelectionRule& rule, double scale, double noise_var) {
  SelectionRule local = rule;
  if (local.is_mmse()) local.set_channel(scale, noise_var);
  return local;
}
}  // namespace

double correlation_from_alphas(double alpha1, double alpha0, double tau) {
  if (!(alpha0 > 0.0) || !(tau > 0.0)) return 0.0;
  return alpha1 * alpha1 / (alpha0 * tau);
}

SEState se_initial_state(const SEParams& params, const LambdaPhi& phi_lambda_u, double v0_value,
                         const ExpectationEngine& engine) {
  SEState st;
  st.t = 0;
  st.alpha_v0 = v0_value * v0_value;
  st.alpha_v1 = v0_value * prior_mean(params.prior_v);
  st.rho_v = correlation_from_alphas(st.alpha_v1, st.alpha_v0,
                                     prior_second_moment(params.prior_v));
  if (!phi_lambda_u.fn) throw std::invalid_argument("se_initial_state: missing phi callback");
  st.lambda_u = engine.expect(params.prior_v, 0.0,
                              [&](double x0, double) { return phi_lambda_u.fn(x0, v0_value); });
  require_finite(st.lambda_u, "lambda_u(0)", 0);
  return st;
}

SEState se_initial_state_moments(const SEParams& params, double alpha_v0, double alpha_v1,
                                 double lambda_u0) {
  if (!(alpha_v0 >= 0.0)) throw std::invalid_argument("se_initial_state_moments: alpha_v0 < 0");
  SEState st;
  st.t = 0;
  st.alpha_v0 = alpha_v0;
  st.alpha_v1 = alpha_v1;
  st.lambda_u = lambda_u0;
  st.rho_v = correlation_from_alphas(alpha_v1, alpha_v0, prior_second_moment(params.prior_v));
  return st;
}

SEState se_step(const SEState& state, const SelectionRule& rule_u, const SelectionRule& rule_v,
                const SEParams& params, const LambdaPhi& phi_lambda_u,
                const LambdaPhi& phi_lambda_v, const ExpectationEngine& engine) {
  if (rule_u.side != FactorSide::u || rule_v.side != FactorSide::v)
    throw std::invalid_argument("se_step: rule sides do not match");
  const int t = state.t;
  const double beta = params.beta;
  const double tau_w = params.tau_w;

  // u-channel: P(t) = beta*alpha_v1*U0 + N(0, beta*tau_w*alpha_v0).
  const double scale_u = beta * state.alpha_v1;
  const double var_u = beta * tau_w * state.alpha_v0;
  const double lambda_u = state.lambda_u;
  const SelectionRule gu = rule_with_channel(rule_u, scale_u, var_u);
  const auto u_next = [&](double x0, double z) {
    return select(gu, t, scale_u * x0 + z, lambda_u);
  };

  SEState next;
  next.t = t + 1;
  next.alpha_u0 = engine.expect(params.prior_u, var_u,
                                [&](double x0, double z) { const double u = u_next(x0, z); return u * u; });
  require_finite(next.alpha_u0, "alpha_u0", t);
  next.alpha_u1 = engine.expect(params.prior_u, var_u,
                                [&](double x0, double z) { return x0 * u_next(x0, z); });
  require_finite(next.alpha_u1, "alpha_u1", t);

  if (!phi_lambda_v.fn) throw std::invalid_argument("se_step: missing phi_lambda_v callback");
  const double lambda_v = engine.expect(
      params.prior_u, var_u, [&](double x0, double z) { return phi_lambda_v.fn(x0, u_next(x0, z)); });
  require_finite(lambda_v, "lambda_v", t);
  next.lambda_v = lambda_v;

  // v-channel: Q(t) = alpha_u1(t+1)*V0 + N(0, tau_w*alpha_u0(t+1)).
  const double scale_v = next.alpha_u1;
  const double var_v = tau_w * next.alpha_u0;
  const SelectionRule gv = rule_with_channel(rule_v, scale_v, var_v);
  const auto v_next = [&](double x0, double z) {
    return select(gv, t, scale_v * x0 + z, lambda_v);
  };

  next.alpha_v0 = engine.expect(params.prior_v, var_v,
                                [&](double x0, double z) { const double v = v_next(x0, z); return v * v; });
  require_finite(next.alpha_v0, "alpha_v0", t);
  next.alpha_v1 = engine.expect(params.prior_v, var_v,
                                [&](double x0, double z) { return x0 * v_next(x0, z); });
  require_finite(next.alpha_v1, "alpha_v1", t);

  if (!phi_lambda_u.fn) throw std::invalid_argument("se_step: missing phi_lambda_u callback");
  next.lambda_u = engine.expect(
      params.prior_v, var_v, [&](double x0, double z) { return phi_lambda_u.fn(x0, v_next(x0, z)); });
  require_finite(next.lambda_u, "lambda_u", t);

  next.rho_u = correlation_from_alphas(next.alpha_u1, next.alpha_u0,
                                       prior_second_moment(params.prior_u));
  next.rho_v = correlation_from_alphas(next.alpha_v1, next.alpha_v0,
                                       prior_second_moment(params.prior_v));
  next.u_channel = {scale_u, var_u, lambda_u, true};
  next.v_channel = {scale_v, var_v, lambda_v, true};
  return next;
}

std::vector<SEState> se_trajectory(const SEParams& params, const SelectionRule& rule_u,
                                   const SelectionRule& rule_v, const LambdaPhi& phi_lambda_u,
                                   const LambdaPhi& phi_lambda_v, const SEState& initial,
                                   int iters, const ExpectationEngine& engine) {
  if (iters < 0) throw std::invalid_argument("se_trajectory: iters must be >= 0");
  std::vector<SEState> traj;
  traj.reserve(iters + 1);
  traj.push_back(initial);
  for (int t = 0; t < iters; ++t)
    traj.push_back(se_step(traj.back(), rule_u, rule_v, params, phi_lambda_u, phi_lambda_v, engine));
  return traj;
}

RhoPair se_linear_recursion(double rho_v, double beta, double tau_u, double tau_v, double tau_w) {
  const double c = tau_u * tau_v;
  const double num_u = beta * c * rho_v;
  const double rho_u_next = clamp01(num_u > 0.0 ? num_u / (num_u + tau_w) : 0.0);
  const double num_v = c * rho_u_next;
  const double rho_v_next = clamp01(num_v > 0.0 ? num_v / (num_v + tau_w) : 0.0);
  return {rho_u_next, rho_v_next};
}

RhoPair se_linear_recursion_alt(double rho_v, double beta, double tau_u, double tau_v,
                                double tau_w) {
  const double c = tau_u * tau_v;
  const double den_u = c * rho_v + tau_w;
  const double rho_u_next = clamp01(den_u > 0.0 ? beta * c * rho_v / den_u : 0.0);
  const double num_v = c * rho_u_next;
  const double rho_v_next = clamp01(num_v > 0.0 ? num_v / (num_v + tau_w) : 0.0);
  return {rho_u_next, rho_v_next};
}

RhoPair se_linear_fixed_point(double beta, double tau_u, double tau_v, double tau_w) {
  if (!(beta > 0.0 && tau_u > 0.0 && tau_v > 0.0 && tau_w >= 0.0))
    throw std::invalid_argument("se_linear_fixed_point: parameters must be positive");
  const double c = tau_u * tau_v;
  const double excess = std::max(0.0, beta * c * c - tau_w * tau_w);
  return {excess / (c * (beta * c + tau_w)), excess / (beta * c * (c + tau_w))};
}

double mmse_function(const Prior& prior, double eta, const ExpectationEngine& engine) {
  if (!(eta >= 0.0)) throw std::invalid_argument("mmse_function: eta must be >= 0");
  validate(prior);
  if (const auto* g = std::get_if<GaussianPrior>(&prior))
    return g->variance / (1.0 + eta * g->variance);
  if (std::holds_alternative<PointMassPrior>(prior)) return 0.0;

  const auto& b = std::get<BernoulliExpPrior>(prior);
  const double tau = prior_second_moment(prior);
  if (eta == 0.0) return prior_variance(prior);
  const double scale = std::sqrt(eta);
  std::ostringstream label;
  label << "mmse(" << describe(prior) << ", eta=" << eta << ")";
  const auto post_mean_sq = [&](double x0, double z) {
    const double y = scale * x0 + z;
    const double g = bernoulli_exp_posterior(b.sparsity, b.rate, scale, 1.0, y).mean;
    return g * g;
  };
  const ExpectationResult r = engine.expect_checked(prior, 1.0, post_mean_sq, label.str());
  return std::max(0.0, tau - r.value);
}

RhoPair se_mmse_recursion(double rho_v, double beta, double tau_w, const Prior& prior_u,
                          const Prior& prior_v, const ExpectationEngine& engine) {
  if (!(rho_v >= 0.0 && rho_v <= 1.0))
    throw std::invalid_argument("se_mmse_recursion: rho_v must be in [0, 1]");
  if (!(tau_w > 0.0)) throw std::invalid_argument("se_mmse_recursion: tau_w must be > 0");
  const double tau_u = prior_second_moment(prior_u);
  const double tau_v = prior_second_moment(prior_v);
  const double eta_u = beta * tau_v * rho_v / tau_w;
  const double rho_u_next = clamp01(1.0 - mmse_function(prior_u, eta_u, engine) / tau_u);
  const double eta_v = tau_u * rho_u_next / tau_w;
  const double rho_v_next = clamp01(1.0 - mmse_function(prior_v, eta_v, engine) / tau_v);
  return {rho_u_next, rho_v_next};
}

double se_mmse_initial_rho_v(const Prior& prior_v) {
  const PriorMoments m = prior_moments(prior_v);
  return m.mean * m.mean / m.second_moment;
}

double phase_transition_threshold(double beta, double tau_u, double tau_v) {
  if (!(beta > 0.0 && tau_u > 0.0 && tau_v > 0.0))
    throw std::invalid_argument("phase_transition_threshold: inputs must be positive");
  return std::sqrt(beta) * tau_u * tau_v;
}

SELimit se_mmse_limit_from(double epsilon, double beta, double tau_w, const Prior& prior_u,
                           const Prior& prior_v, const ExpectationEngine& engine, int max_iters,
                           double tol) {
  double rho_v = epsilon;
  double rho_u = 0.0;
  for (int t = 0; t < max_iters; ++t) {
    const RhoPair next = se_mmse_recursion(rho_v, beta, tau_w, prior_u, prior_v, engine);
    const bool settled = std::abs(next.rho_v - rho_v) < tol;
    rho_u = next.rho_u;
    rho_v = next.rho_v;
    if (settled) return {rho_u, rho_v, t + 1, true};
  }
  return {rho_u, rho_v, max_iters, false};
}

double scalar_equivalent_metric(ScalarMetric metric, const SEState& state, const SEParams& params,
                                const SelectionRule& rule_u, const SelectionRule& rule_v,
                                const ExpectationEngine& engine) {
  switch (metric) {
    case ScalarMetric::corr_u:
      return state.rho_u;
    case ScalarMetric::corr_v:
      return state.rho_v;
    case ScalarMetric::mse_u: {
      if (!state.u_channel.valid)
        throw std::invalid_argument("scalar_equivalent_metric: mse_u needs t >= 1");
      const SEChannel& ch = state.u_channel;
      const SelectionRule g = rule_with_channel(rule_u, ch.scale, ch.noise_var);
      const double mse = engine.expect(params.prior_u, ch.noise_var, [&](double x0, double z) {
        const double est = select(g, state.t - 1, ch.scale * x0 + z, ch.lambda);
        const double err = x0 - est;
        return err * err;
      });
      require_finite(mse, "mse_u", state.t);
      return mse;
    }
    case ScalarMetric::mse_v: {
      if (!state.v_channel.valid)
        throw std::invalid_argument("scalar_equivalent_metric: mse_v needs t >= 1");
      const SEChannel& ch = state.v_channel;
      const SelectionRule g = rule_with_channel(rule_v, ch.scale, ch.noise_var);
      const double mse = engine.expect(params.prior_v, ch.noise_var, [&](double x0, double z) {
        const double est = select(g, state.t - 1, ch.scale * x0 + z, ch.lambda);
        const double err = x0 - est;
        return err * err;
      });
      require_finite(mse, "mse_v", state.t);
      return mse;
    }
  }
  throw std::logic_error("scalar_equivalent_metric: unknown metric");
}

}  // namespace iterfac
