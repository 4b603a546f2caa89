#include "iterfac/scalar_cost.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace iterfac {

void validate(const ScalarCost& cost) {
  if (const auto* l1 = std::get_if<L1Cost>(&cost)) {
    if (!(l1->gamma >= 0.0)) throw std::invalid_argument("l1 cost: gamma must be >= 0");
  } else if (const auto* nl1 = std::get_if<NonnegL1Cost>(&cost)) {
    if (!(nl1->gamma >= 0.0)) throw std::invalid_argument("nonneg_l1 cost: gamma must be >= 0");
  } else if (const auto* l2 = std::get_if<SquaredL2Cost>(&cost)) {
    if (!(l2->weight >= 0.0)) throw std::invalid_argument("squared_l2 cost: weight must be >= 0");
  }
}

double cost_value(const ScalarCost& cost, double x) {
  if (std::holds_alternative<ZeroCost>(cost)) return 0.0;
  if (const auto* l1 = std::get_if<L1Cost>(&cost)) return l1->gamma * std::abs(x);
  if (const auto* nl1 = std::get_if<NonnegL1Cost>(&cost))
    return (x < 0.0) ? std::numeric_limits<double>::infinity() : nl1->gamma * x;
  return 0.5 * std::get<SquaredL2Cost>(cost).weight * x * x;
}

double prox(const ScalarCost& cost, double p, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("prox: nonconvex scalar subproblem (lambda <= 0)");
  if (std::holds_alternative<ZeroCost>(cost)) return p / lambda;
  if (const auto* l1 = std::get_if<L1Cost>(&cost)) {
    const double shrunk = std::abs(p) - l1->gamma;
    return (shrunk > 0.0) ? std::copysign(shrunk, p) / lambda : 0.0;
  }
  if (const auto* nl1 = std::get_if<NonnegL1Cost>(&cost)) {
    const double shrunk = p - nl1->gamma;
    return (shrunk > 0.0) ? shrunk / lambda : 0.0;
  }
  return p / (lambda + std::get<SquaredL2Cost>(cost).weight);
}

double prox_derivative(const ScalarCost& cost, double p, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("prox: nonconvex scalar subproblem (lambda <= 0)");
  if (std::holds_alternative<ZeroCost>(cost)) return 1.0 / lambda;
  if (const auto* l1 = std::get_if<L1Cost>(&cost))
    return (std::abs(p) > l1->gamma) ? 1.0 / lambda : 0.0;
  if (const auto* nl1 = std::get_if<NonnegL1Cost>(&cost))
    return (p > nl1->gamma) ? 1.0 / lambda : 0.0;
  return 1.0 / (lambda + std::get<SquaredL2Cost>(cost).weight);
}

std::string describe(const ScalarCost& cost) {
  std::ostringstream os;
  if (std::holds_alternative<ZeroCost>(cost))
    os << "zero";
  else if (const auto* l1 = std::get_if<L1Cost>(&cost))
    os << "l1(gamma=" << l1->gamma << ")";
  else if (const auto* nl1 = std::get_if<NonnegL1Cost>(&cost))
    os << "nonneg_l1(gamma=" << nl1->gamma << ")";
  else
    os << "squared_l2(weight=" << std::get<SquaredL2Cost>(cost).weight << ")";
  return os.str();
}

}  // namespace iterfac
