#pragma once

#include <string>
#include <variant>

namespace iterfac {

// Separable regularizers c(x) applied componentwise to a factor.
struct ZeroCost {};
struct L1Cost {
  double gamma = 0.0;
};
struct NonnegL1Cost {
  double gamma = 0.0;  // +infinity cost for x < 0
};
struct SquaredL2Cost {
  double weight = 0.0;  // c(x) = weight * x^2 / 2
};

using ScalarCost = std::variant<ZeroCost, L1Cost, NonnegL1Cost, SquaredL2Cost>;

void validate(const ScalarCost& cost);

// c(x); +infinity where the cost's domain excludes x.
double cost_value(const ScalarCost& cost, double x);

// argmin_x [ -p*x + c(x) + (lambda/2) x^2 ]; requires lambda > 0.
double prox(const ScalarCost& cost, double p, double lambda);

// d(prox)/dp; 0 inside an L1 dead zone (value at the kink itself is taken as 0).
double prox_derivative(const ScalarCost& cost, double p, double lambda);

std::string describe(const ScalarCost& cost);

}  // namespace iterfac
