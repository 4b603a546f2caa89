#pragma once

#include <utility>
#include <vector>

#include "iterfac/expectation.hpp"
#include "iterfac/prior.hpp"
#include "iterfac/selection.hpp"

namespace iterfac {

struct SEParams {
  double beta = 1.0;
  double tau_w = 1.0;
  Prior prior_u;
  Prior prior_v;
};

// Scalar channel that generated an iterate's law: X(t) = G(scale*X0 + N(0, noise_var), lambda).
struct SEChannel {
  double scale = 0.0;
  double noise_var = 0.0;
  double lambda = 1.0;
  bool valid = false;
};

// Deterministic second-order state of the scalar-equivalent model at iteration t.
// lambda_u is the adaptation value the u-update leaving this state will use;
// lambda_v is the value the v-update that produced this state used.
struct SEState {
  int t = 0;
  double alpha_u0 = 0.0, alpha_u1 = 0.0;
  double alpha_v0 = 0.0, alpha_v1 = 0.0;
  double lambda_u = 1.0, lambda_v = 0.0;
  double rho_u = 0.0, rho_v = 0.0;
  SEChannel u_channel, v_channel;
};

double correlation_from_alphas(double alpha1, double alpha0, double tau);

// State at t = 0 with constant initial estimates u(0) = 0, v(0) = v0_value.
SEState se_initial_state(const SEParams& params, const LambdaPhi& phi_lambda_u, double v0_value,
                         const ExpectationEngine& engine);

// State at t = 0 pinned directly by its v-side second-order moments (epsilon
// experiments); lambda_u0 must be supplied since no initial law is available.
SEState se_initial_state_moments(const SEParams& params, double alpha_v0, double alpha_v1,
                                 double lambda_u0);

// One round of the general state-evolution recursion: u-channel from the
// v-side moments, then the v-channel from the fresh u-side moments, with the
// adaptation expectations evaluated under the same laws.
SEState se_step(const SEState& state, const SelectionRule& rule_u, const SelectionRule& rule_v,
                const SEParams& params, const LambdaPhi& phi_lambda_u,
                const LambdaPhi& phi_lambda_v, const ExpectationEngine& engine);

std::vector<SEState> se_trajectory(const SEParams& params, const SelectionRule& rule_u,
                                   const SelectionRule& rule_v, const LambdaPhi& phi_lambda_u,
                                   const LambdaPhi& phi_lambda_v, const SEState& initial,
                                   int iters, const ExpectationEngine& engine);

struct RhoPair {
  double rho_u;
  double rho_v;
};

// Closed-form correlation recursion for linear selection:
//   rho_u' = beta*c*rho_v / (beta*c*rho_v + tau_w),  c = tau_u*tau_v,
//   rho_v' = c*rho_u' / (c*rho_u' + tau_w).
// This is the form consistent with the closed-form fixed point below (and with
// Monte Carlo); see se_linear_recursion_alt for the inconsistent variant.
RhoPair se_linear_recursion(double rho_v, double beta, double tau_u, double tau_v, double tau_w);

// Variant with the aspect ratio dropped from the u-side denominator
// (rho_u' = beta*c*rho_v / (c*rho_v + tau_w)). Its fixed point does not match
// se_linear_fixed_point; kept only for diagnostic comparison.
RhoPair se_linear_recursion_alt(double rho_v, double beta, double tau_u, double tau_v,
                                double tau_w);

// Limits of the linear recursion for any positive start:
//   rho_u* = [beta c^2 - tau_w^2]+ / (c (beta c + tau_w)),
//   rho_v* = [beta c^2 - tau_w^2]+ / (beta c (c + tau_w)).
RhoPair se_linear_fixed_point(double beta, double tau_u, double tau_v, double tau_w);

// Scalar MMSE under an AWGN observation at SNR eta:
//   E(eta) = var(X0 | Y = sqrt(eta) X0 + D), D ~ N(0,1).
double mmse_function(const Prior& prior, double eta, const ExpectationEngine& engine);

// Correlation recursion for posterior-mean selection:
//   rho_u' = 1 - E_u(beta tau_v rho_v / tau_w)/tau_u,
//   rho_v' = 1 - E_v(tau_u rho_u' / tau_w)/tau_v.
RhoPair se_mmse_recursion(double rho_v, double beta, double tau_w, const Prior& prior_u,
                          const Prior& prior_v, const ExpectationEngine& engine);

// rho_v(0) = (E V0)^2 / E V0^2 for the prior-mean initial condition.
double se_mmse_initial_rho_v(const Prior& prior_v);

// Noise level below which a vanishing initial correlation escapes zero under
// posterior-mean selection: tau_w* = sqrt(beta) * tau_u * tau_v.
double phase_transition_threshold(double beta, double tau_u, double tau_v);

struct SELimit {
  double rho_u;
  double rho_v;
  int iterations;
  bool converged;
};

// Iterate the posterior-mean recursion from rho_v(0) = epsilon to (near)
// convergence; the computational surrogate for the vanishing-start limit.
SELimit se_mmse_limit_from(double epsilon, double beta, double tau_w, const Prior& prior_u,
                           const Prior& prior_v, const ExpectationEngine& engine,
                           int max_iters = 10000, double tol = 1e-13);

enum class ScalarMetric { mse_u, mse_v, corr_u, corr_v };

// Component-separable metric of (X0, X(t)) under the scalar-equivalent channel
// recorded in the state; mse metrics require t >= 1.
double scalar_equivalent_metric(ScalarMetric metric, const SEState& state, const SEParams& params,
                                const SelectionRule& rule_u, const SelectionRule& rule_v,
                                const ExpectationEngine& engine);

}  // namespace iterfac
