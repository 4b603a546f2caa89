#pragma once

#include <Eigen/Core>

namespace iterfac {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Nodes/weights for integral e^{-x^2} f(x) dx over R (physicists' convention).
QuadratureRule gauss_hermite(int n);

// Nodes/weights for integral_0^inf e^{-x} f(x) dx.
QuadratureRule gauss_laguerre(int n);

// E[f(Z)] for Z ~ N(mean, var) using a Gauss-Hermite rule.
template <typename F>
double normal_expectation(const QuadratureRule& gh, double mean, double var, F&& f) {
  constexpr double kInvSqrtPi = 0.5641895835477563;
  const double spread = std::sqrt(2.0 * var);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < gh.nodes.size(); ++i)
    acc += gh.weights[i] * f(mean + spread * gh.nodes[i]);
  return acc * kInvSqrtPi;
}

// E[f(X)] for X ~ Exp(rate) using a Gauss-Laguerre rule.
template <typename F>
double exponential_expectation(const QuadratureRule& gl, double rate, F&& f) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < gl.nodes.size(); ++i)
    acc += gl.weights[i] * f(gl.nodes[i] / rate);
  return acc;
}

}  // namespace iterfac
