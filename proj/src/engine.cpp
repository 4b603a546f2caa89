#include <cmath>
#include <limits>
#include <random>

#include "iterfac/iterfac.hpp"
#include "iterfac/rng.hpp"

namespace iterfac {

namespace {

Eigen::VectorXd initial_v(const InitV& init, const RankOneProblem& problem, const Prior& prior_v) {
  switch (init.kind) {
    case InitV::Kind::prior_mean:
      return Eigen::VectorXd::Constant(problem.n, prior_mean(prior_v));
    case InitV::Kind::constant:
      return Eigen::VectorXd::Constant(problem.n, init.value);
    case InitV::Kind::random_unit: {
      std::mt19937_64 eng = make_engine(init.seed);
      std::normal_distribution<double> dist(0.0, 1.0);
      Eigen::VectorXd v(problem.n);
      for (Eigen::Index j = 0; j < problem.n; ++j) v[j] = dist(eng);
      const double norm = v.norm();
      if (norm == 0.0) throw IterFacError("random unit init drew a zero vector", 0);
      return v / norm;
    }
    case InitV::Kind::explicit_vec:
      if (init.vec.size() != problem.n)
        throw std::invalid_argument("init_v: explicit vector length mismatch");
      return init.vec;
  }
  throw std::logic_error("initial_v: unknown kind");
}

Eigen::VectorXd initial_u(const InitU& init, const RankOneProblem& problem) {
  if (init.kind == InitU::Kind::zeros) return Eigen::VectorXd::Zero(problem.m);
  if (init.vec.size() != problem.m)
    throw std::invalid_argument("init_u: explicit vector length mismatch");
  return init.vec;
}

const Prior* rule_prior(const SelectionRule& rule) {
  if (const auto* mm = std::get_if<MmseRule>(&rule.kind)) return &mm->prior;
  return nullptr;
}

// Componentwise map: out_i = G(t, in_i, lambda); accumulates sum of dG/dp.
void apply_rule(const SelectionRule& rule, int t, const Eigen::VectorXd& in, double lambda,
                Eigen::VectorXd& out, double& derivative_sum) {
  out.resize(in.size());
  derivative_sum = 0.0;
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    out[i] = select(rule, t, in[i], lambda);
    derivative_sum += select_derivative(rule, t, in[i], lambda);
  }
}

void check_finite(const Eigen::VectorXd& x, const char* which, int t) {
  if (!x.allFinite()) {
    throw IterFacError(std::string("nonfinite ") + which + " at iteration " + std::to_string(t), t);
  }
}

}  // namespace

std::vector<double> IterFacTrajectory::rho_u_series() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.rho_u);
  return out;
}

std::vector<double> IterFacTrajectory::rho_v_series() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.rho_v);
  return out;
}

double correlation(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth) {
  const double nx = estimate.squaredNorm();
  const double n0 = truth.squaredNorm();
  if (nx == 0.0 || n0 == 0.0) return 0.0;
  const double dot = estimate.dot(truth);
  return dot * dot / (nx * n0);
}

double objective_value(const RankOneProblem& problem, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v, const ScalarCost& cost_u,
                       const ScalarCost& cost_v) {
  if (u.size() != problem.m || v.size() != problem.n)
    throw std::invalid_argument("objective_value: dimension mismatch");
  const double fro = (problem.a - u * v.transpose()).squaredNorm();
  double total = fro / (2.0 * static_cast<double>(problem.m));
  for (Eigen::Index i = 0; i < u.size(); ++i) total += cost_value(cost_u, u[i]);
  for (Eigen::Index j = 0; j < v.size(); ++j) total += cost_value(cost_v, v[j]);
  return total;
}

IterFacTrajectory run_iterfac(const RankOneProblem& problem, SelectionRule rule_u,
                              SelectionRule rule_v, const IterFacConfig& config) {
  if (rule_u.side != FactorSide::u || rule_v.side != FactorSide::v)
    throw std::invalid_argument("run_iterfac: rule sides do not match");
  if (config.max_iters < 1) throw std::invalid_argument("run_iterfac: max_iters must be >= 1");
  if (config.damping_mode == DampingMode::descent && (config.mu_u < 0.0 || config.mu_v < 0.0))
    throw std::invalid_argument("run_iterfac: descent damping requires mu_u, mu_v >= 0");

  const double m = static_cast<double>(problem.m);
  const double tau_w = problem.tau_w;
  const double beta = problem.beta;

  ScalarCost cost_u = config.cost_u;
  ScalarCost cost_v = config.cost_v;
  if (rule_u.is_prox()) cost_u = rule_u.prox_cost();
  if (rule_v.is_prox()) cost_v = rule_v.prox_cost();

  // prior_mean init resolves from the v-rule's prior; rules without one must
  // use the constant/random/explicit kinds.
  Eigen::VectorXd v;
  if (config.init_v.kind == InitV::Kind::prior_mean) {
    const Prior* pv = rule_prior(rule_v);
    if (pv == nullptr)
      throw std::invalid_argument("run_iterfac: prior_mean init requires a posterior-mean v-rule; "
                                  "use constant/random/explicit init for other rules");
    v = initial_v(config.init_v, problem, *pv);
  } else {
    v = initial_v(config.init_v, problem, GaussianPrior{});
  }
  Eigen::VectorXd u = initial_u(config.init_u, problem);

  IterFacTrajectory traj;
  traj.steps.resize(config.max_iters + 1);

  const double u0_sq = problem.u0.squaredNorm();
  const double v0_sq = problem.v0.squaredNorm();

  auto record_state = [&](int t, const Eigen::VectorXd& ut, const Eigen::VectorXd& vt) {
    IterFacIterate& it = traj.steps[t];
    it.alpha_u0 = ut.squaredNorm() / m;
    it.alpha_u1 = ut.dot(problem.u0) / m;
    it.alpha_v0 = vt.squaredNorm() / static_cast<double>(problem.n);
    it.alpha_v1 = vt.dot(problem.v0) / static_cast<double>(problem.n);
    it.rho_u = (u0_sq > 0.0) ? correlation(ut, problem.u0) : 0.0;
    it.rho_v = (v0_sq > 0.0) ? correlation(vt, problem.v0) : 0.0;
    if (config.record_vectors) {
      it.u = ut;
      it.v = vt;
    }
    if (config.record_objective) it.objective = objective_value(problem, ut, vt, cost_u, cost_v);
  };

  record_state(0, u, v);

  double mu_u = (config.damping_mode == DampingMode::descent) ? config.mu_u : 0.0;
  Eigen::VectorXd p, q, u_next, v_next;

  for (int t = 0; t < config.max_iters; ++t) {
    IterFacIterate& it = traj.steps[t];

    // lambda_u(t) from v(t); mu_u(t) fixed (descent) or carried from the
    // previous v-derivative sum (analysis; 0 at t = 0).
    const double lambda_u = (config.lambda_mode == LambdaMode::descent_rule)
                                ? lambda_descent(mu_u, v.squaredNorm() / m)
                                : lambda_analysis(config.phi_lambda_u, problem.v0, v);
    if (rule_u.is_mmse())
      rule_u.set_channel(beta * it.alpha_v1, beta * tau_w * it.alpha_v0);

    p.noalias() = problem.a * v / m;
    p.noalias() += mu_u * u;

    double du_sum = 0.0;
    apply_rule(rule_u, t, p, lambda_u, u_next, du_sum);
    check_finite(u_next, "u", t);

    const double alpha_u0_next = u_next.squaredNorm() / m;
    const double alpha_u1_next = u_next.dot(problem.u0) / m;

    const double mu_v = (config.damping_mode == DampingMode::descent)
                            ? config.mu_v
                            : -(tau_w / m) * du_sum;
    const double lambda_v = (config.lambda_mode == LambdaMode::descent_rule)
                                ? lambda_descent(mu_v, u_next.squaredNorm() / m)
                                : lambda_analysis(config.phi_lambda_v, problem.u0, u_next);
    if (rule_v.is_mmse()) rule_v.set_channel(alpha_u1_next, tau_w * alpha_u0_next);

    q.noalias() = problem.a.transpose() * u_next / m;
    q.noalias() += mu_v * v;

    double dv_sum = 0.0;
    apply_rule(rule_v, t, q, lambda_v, v_next, dv_sum);
    check_finite(v_next, "v", t);

    it.lambda_u = lambda_u;
    it.lambda_v = lambda_v;
    it.mu_u = mu_u;
    it.mu_v = mu_v;
    if (config.record_vectors) {
      it.p = p;
      it.q = q;
    }

    u.swap(u_next);
    v.swap(v_next);
    record_state(t + 1, u, v);

    mu_u = (config.damping_mode == DampingMode::descent) ? config.mu_u : -(tau_w / m) * dv_sum;
  }

  return traj;
}

std::pair<std::vector<double>, std::vector<double>> empirical_correlations(
    const IterFacTrajectory& trajectory, const RankOneProblem& problem) {
  std::vector<double> rho_u, rho_v;
  rho_u.reserve(trajectory.steps.size());
  rho_v.reserve(trajectory.steps.size());
  for (const auto& step : trajectory.steps) {
    if (step.u.size() == 0 || step.v.size() == 0)
      throw std::invalid_argument("empirical_correlations: trajectory lacks stored vectors");
    rho_u.push_back(correlation(step.u, problem.u0));
    rho_v.push_back(correlation(step.v, problem.v0));
  }
  return {rho_u, rho_v};
}

}  // namespace iterfac
