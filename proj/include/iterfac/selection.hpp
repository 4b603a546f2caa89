#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <variant>

#include "iterfac/denoisers.hpp"
#include "iterfac/prior.hpp"
#include "iterfac/scalar_cost.hpp"

namespace iterfac {

enum class FactorSide { u, v };

// Effective scalar channel p = scale * X0 + N(0, noise_var) a posterior-mean
// rule estimates against. Owned and updated by the engine running the rule.
struct MmseChannel {
  double scale = 0.0;
  double noise_var = 0.0;  // 0 together with scale 0 means "uninformative"
};

struct LinearRule {};  // G(t, p, lambda) = lambda * p

struct MmseRule {
  Prior prior;
  MmseChannel channel;
};

struct ProxRule {
  ScalarCost cost;
};

// Componentwise factor-selection function G with input derivative.
struct SelectionRule {
  std::variant<LinearRule, MmseRule, ProxRule> kind;
  FactorSide side = FactorSide::u;

  static SelectionRule linear(FactorSide side);
  static SelectionRule mmse(const Prior& prior, FactorSide side);
  static SelectionRule prox(const ScalarCost& cost, FactorSide side);

  bool is_mmse() const { return std::holds_alternative<MmseRule>(kind); }
  bool is_linear() const { return std::holds_alternative<LinearRule>(kind); }
  bool is_prox() const { return std::holds_alternative<ProxRule>(kind); }
  const ScalarCost& prox_cost() const { return std::get<ProxRule>(kind).cost; }
  void set_channel(double scale, double noise_var);
  const MmseChannel& channel() const { return std::get<MmseRule>(kind).channel; }
};

double select(const SelectionRule& rule, int t, double p, double lambda);
double select_derivative(const SelectionRule& rule, int t, double p, double lambda);

// Finite Lipschitz constant of p -> G(t, p, lambda). Exact for linear/prox and
// Gaussian-prior posterior means; a reported grid estimate otherwise.
double lipschitz_constant(const SelectionRule& rule, double lambda);

// Adaptation callback phi(truth, estimate) with its declared pseudo-Lipschitz order.
struct LambdaPhi {
  std::function<double(double, double)> fn;
  int pl_order = 2;
  std::string name;  // serialization / diagnostics
};

LambdaPhi phi_constant(double c);
LambdaPhi phi_second_moment(double coefficient);  // phi(x0, x) = coefficient * x^2

// lambda = mu + norm_sq_over_m, the descent-mode adaptation.
double lambda_descent(double mu, double norm_sq_over_m);

// Empirical average (1/len) sum phi(truth_i, estimate_i), the analysis-mode adaptation.
double lambda_analysis(const LambdaPhi& phi, const Eigen::VectorXd& truth,
                       const Eigen::VectorXd& estimate);

}  // namespace iterfac
