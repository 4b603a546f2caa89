#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iterfac/problem.hpp"
#include "iterfac/scalar_cost.hpp"
#include "iterfac/selection.hpp"

namespace iterfac {

// Damping regimes are mutually exclusive contracts: descent (fixed mu >= 0,
// objective monotonicity) vs analysis (derivative-average mu, possibly
// negative, scalar-equivalent tracking).
enum class DampingMode { analysis, descent };
enum class LambdaMode { analysis_average, descent_rule };

struct InitV {
  enum class Kind { prior_mean, constant, random_unit, explicit_vec } kind = Kind::prior_mean;
  std::uint64_t seed = 0;
  double value = 0.0;
  Eigen::VectorXd vec;

  static InitV prior_mean() { return {}; }  // resolved from the v-rule's prior
  static InitV constant(double c) { return {Kind::constant, 0, c, {}}; }
  static InitV random_unit(std::uint64_t seed) { return {Kind::random_unit, seed, 0.0, {}}; }
  static InitV explicit_vec(Eigen::VectorXd v) {
    return {Kind::explicit_vec, 0, 0.0, std::move(v)};
  }
};

struct InitU {
  enum class Kind { zeros, explicit_vec } kind = Kind::zeros;
  Eigen::VectorXd vec;

  static InitU zeros() { return {}; }
  static InitU explicit_vec(Eigen::VectorXd u) { return {Kind::explicit_vec, std::move(u)}; }
};

struct IterFacConfig {
  int max_iters = 10;
  DampingMode damping_mode = DampingMode::analysis;
  double mu_u = 0.0;  // descent-mode damping, must be >= 0
  double mu_v = 0.0;
  LambdaMode lambda_mode = LambdaMode::analysis_average;
  LambdaPhi phi_lambda_u = phi_constant(1.0);  // feeds lambda_u, averaged over (v0_j, v_j(t))
  LambdaPhi phi_lambda_v = phi_constant(1.0);  // feeds lambda_v, averaged over (u0_i, u_i(t+1))
  InitV init_v = InitV::prior_mean();
  InitU init_u = InitU::zeros();
  bool record_objective = false;
  ScalarCost cost_u = ZeroCost{};  // objective terms; taken from prox rules when present
  ScalarCost cost_v = ZeroCost{};
  bool record_vectors = true;
};

// Per-iteration record. u/v (and the alpha/rho stats) describe iteration t;
// p, q and the selected lambda/mu belong to the transition t -> t+1 and are
// NaN/empty on the final entry.
struct IterFacIterate {
  Eigen::VectorXd u, v, p, q;
  double lambda_u = 0.0, lambda_v = 0.0;
  double mu_u = 0.0, mu_v = 0.0;
  double alpha_u0 = 0.0, alpha_u1 = 0.0;
  double alpha_v0 = 0.0, alpha_v1 = 0.0;
  double rho_u = 0.0, rho_v = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

struct IterFacTrajectory {
  std::vector<IterFacIterate> steps;  // t = 0 .. max_iters
  std::vector<double> rho_u_series() const;
  std::vector<double> rho_v_series() const;
};

struct IterFacError : std::runtime_error {
  IterFacError(const std::string& what, int iteration) : std::runtime_error(what), iteration(iteration) {}
  int iteration;
};

IterFacTrajectory run_iterfac(const RankOneProblem& problem, SelectionRule rule_u,
                              SelectionRule rule_v, const IterFacConfig& config);

// (1/2m) ||A - u v^T||_F^2 + sum c_u(u_i) + sum c_v(v_j)
double objective_value(const RankOneProblem& problem, const Eigen::VectorXd& u,
                       const Eigen::VectorXd& v, const ScalarCost& cost_u,
                       const ScalarCost& cost_v);

// rho(t) = (x(t)^T x0)^2 / (||x(t)||^2 ||x0||^2), 0 when either norm vanishes.
std::pair<std::vector<double>, std::vector<double>> empirical_correlations(
    const IterFacTrajectory& trajectory, const RankOneProblem& problem);

double correlation(const Eigen::VectorXd& estimate, const Eigen::VectorXd& truth);

}  // namespace iterfac
