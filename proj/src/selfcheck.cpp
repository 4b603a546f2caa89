#include "iterfac/selfcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "iterfac/iterfac.hpp"
#include "iterfac/rng.hpp"
#include "iterfac/state_evolution.hpp"

namespace iterfac {

namespace {

ScalarCost random_cost(std::mt19937_64& eng) {
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> weight(0.0, 1.5);
  switch (pick(eng)) {
    case 0: return ZeroCost{};
    case 1: return L1Cost{weight(eng)};
    case 2: return NonnegL1Cost{weight(eng)};
    default: return SquaredL2Cost{weight(eng)};
  }
}

double prox_objective(const ScalarCost& cost, double p, double lambda, double x) {
  return -p * x + cost_value(cost, x) + 0.5 * lambda * x * x;
}

CheckResult check_prox_oracle() {
  std::mt19937_64 eng = make_engine(101);
  std::uniform_real_distribution<double> pdist(-4.0, 4.0);
  std::uniform_real_distribution<double> ldist(0.1, 4.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const ScalarCost cost = random_cost(eng);
    const double p = pdist(eng);
    const double lambda = ldist(eng);
    const double x = prox(cost, p, lambda);
    const double fx = prox_objective(cost, p, lambda, x);
    // Coarse grid plus a local refinement around the grid minimum.
    double best = fx;
    double best_x = x;
    for (int i = 0; i <= 4000; ++i) {
      const double cand = -6.0 + 12.0 * i / 4000.0;
      const double f = prox_objective(cost, p, lambda, cand);
      if (f < best) { best = f; best_x = cand; }
    }
    for (int i = 0; i <= 2000; ++i) {
      const double cand = best_x - 0.003 + 0.006 * i / 2000.0;
      const double f = prox_objective(cost, p, lambda, cand);
      if (f < best) best = f;
    }
    worst = std::max(worst, fx - best);
    const double f_plus = prox_objective(cost, p, lambda, x + 1e-4);
    const double f_minus = prox_objective(cost, p, lambda, x - 1e-4);
    if (fx > f_plus + 1e-12 || fx > f_minus + 1e-12)
      return {"prox-grid-oracle", false, "first-order optimality violated"};
  }
  std::ostringstream os;
  os << "max objective excess over oracle " << worst;
  return {"prox-grid-oracle", worst <= 1e-8, os.str()};
}

CheckResult check_derivatives() {
  std::mt19937_64 eng = make_engine(202);
  std::uniform_real_distribution<double> pdist(-3.0, 3.0);
  std::uniform_real_distribution<double> ldist(0.3, 3.0);
  const double h = 1e-6;
  double worst = 0.0;
  auto probe = [&](const SelectionRule& rule, double p, double lambda) {
    const double fd =
        (select(rule, 0, p + h, lambda) - select(rule, 0, p - h, lambda)) / (2.0 * h);
    const double an = select_derivative(rule, 0, p, lambda);
    const double denom = std::max(1e-8, std::abs(fd));
    worst = std::max(worst, std::abs(an - fd) / denom);
  };
  for (int k = 0; k < 120; ++k) {
    const double lambda = ldist(eng);
    probe(SelectionRule::linear(FactorSide::u), pdist(eng), lambda);

    SelectionRule prox_rule = SelectionRule::prox(random_cost(eng), FactorSide::u);
    double p = pdist(eng);
    // keep clear of prox kinks; the dead-zone convention is checked elsewhere
    if (const auto* l1 = std::get_if<L1Cost>(&std::get<ProxRule>(prox_rule.kind).cost)) {
      if (std::abs(std::abs(p) - l1->gamma) < 1e-3) p += 0.01;
    }
    if (const auto* nl1 = std::get_if<NonnegL1Cost>(&std::get<ProxRule>(prox_rule.kind).cost)) {
      if (std::abs(p - nl1->gamma) < 1e-3) p += 0.01;
    }
    probe(prox_rule, p, lambda);

    SelectionRule mmse_g = SelectionRule::mmse(GaussianPrior{0.2, 1.3}, FactorSide::u);
    mmse_g.set_channel(0.8, 0.5);
    probe(mmse_g, pdist(eng), 1.0);

    SelectionRule mmse_b = SelectionRule::mmse(BernoulliExpPrior{0.1, 1.0}, FactorSide::v);
    mmse_b.set_channel(1.1, 0.4);
    probe(mmse_b, pdist(eng), 1.0);
  }
  std::ostringstream os;
  os << "max relative derivative error " << worst;
  return {"derivative-finite-difference", worst <= 1e-5, os.str()};
}

CheckResult check_cross_engine() {
  const ExpectationEngine quad = ExpectationEngine::quadrature();
  const ExpectationEngine mc = ExpectationEngine::monte_carlo(400000, 99, 1.0);
  const Prior priors[] = {Prior{GaussianPrior{0.0, 1.0}}, Prior{BernoulliExpPrior{0.1, 1.0}}};
  double worst_sigma = 0.0;
  for (const Prior& prior : priors) {
    for (double noise_var : {0.3, 1.0}) {
      const auto f = [](double x0, double z) {
        const double y = 0.7 * x0 + z;
        return y * y + 0.5 * x0 * y;
      };
      const double qv = quad.expect(prior, noise_var, f);
      const ExpectationResult mv = mc.expect_checked(prior, noise_var, f, "cross-engine");
      const double sigmas = std::abs(qv - mv.value) / std::max(mv.error, 1e-12);
      worst_sigma = std::max(worst_sigma, sigmas);
    }
  }
  std::ostringstream os;
  os << "max |quad - mc| = " << worst_sigma << " standard errors";
  return {"se-cross-engine", worst_sigma <= 3.0, os.str()};
}

CheckResult check_linear_fixed_point() {
  std::mt19937_64 eng = make_engine(303);
  std::uniform_real_distribution<double> bdist(0.2, 1.8);
  std::uniform_real_distribution<double> tdist(0.3, 1.8);
  double worst = 0.0;
  for (int k = 0; k < 25; ++k) {
    const double beta = bdist(eng);
    const double tau_u = tdist(eng), tau_v = tdist(eng), tau_w = tdist(eng);
    const RhoPair fp = se_linear_fixed_point(beta, tau_u, tau_v, tau_w);
    double rho_v = 0.5;
    RhoPair cur{0.0, rho_v};
    for (int t = 0; t < 20000; ++t) {
      cur = se_linear_recursion(rho_v, beta, tau_u, tau_v, tau_w);
      if (std::abs(cur.rho_v - rho_v) < 1e-16) break;
      rho_v = cur.rho_v;
    }
    worst = std::max({worst, std::abs(cur.rho_u - fp.rho_u), std::abs(cur.rho_v - fp.rho_v)});
  }
  std::ostringstream os;
  os << "max |iterated - closed form| " << worst;
  return {"linear-fixed-point-identity", worst <= 1e-10, os.str()};
}

CheckResult check_damping_pairing(bool flip_sign) {
  const RankOneProblem problem =
      generate_problem(40, 24, GaussianPrior{0.0, 1.0}, GaussianPrior{0.0, 1.0}, 0.4, 777);
  IterFacConfig cfg;
  cfg.max_iters = 6;
  cfg.damping_mode = DampingMode::analysis;
  cfg.lambda_mode = LambdaMode::analysis_average;
  cfg.init_v = InitV::random_unit(5);
  const IterFacTrajectory traj = run_iterfac(problem, SelectionRule::linear(FactorSide::u),
                                             SelectionRule::linear(FactorSide::v), cfg);
  const double sign = flip_sign ? 1.0 : -1.0;
  double worst = 0.0;
  for (int t = 0; t < cfg.max_iters; ++t) {
    const auto& it = traj.steps[t];
    const double expect_mu_v = sign * problem.tau_w * it.lambda_u;
    worst = std::max(worst, std::abs(it.mu_v - expect_mu_v));
    if (t + 1 < cfg.max_iters) {
      const double expect_mu_u = sign * problem.beta * problem.tau_w * it.lambda_v;
      worst = std::max(worst, std::abs(traj.steps[t + 1].mu_u - expect_mu_u));
    }
  }
  std::ostringstream os;
  os << "max damping identity residual " << worst;
  return {"damping-cross-pairing", worst <= 1e-12, os.str()};
}

}  // namespace

SelfcheckReport run_selfcheck(const SelfcheckOptions& opts) {
  SelfcheckReport report;
  report.checks.push_back(check_prox_oracle());
  report.checks.push_back(check_derivatives());
  report.checks.push_back(check_cross_engine());
  report.checks.push_back(check_linear_fixed_point());
  report.checks.push_back(check_damping_pairing(opts.flip_damping_sign));
  report.all_pass = true;
  for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
  return report;
}

}  // namespace iterfac
