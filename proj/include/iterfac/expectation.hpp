#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "iterfac/prior.hpp"
#include "iterfac/quadrature.hpp"

namespace iterfac {

struct ExpectationResult {
  double value = 0.0;
  double error = 0.0;  // refinement contrast (quadrature) or standard error (Monte Carlo)
};

// Raised when an expectation cannot be certified to the engine tolerance.
struct ExpectationError : std::runtime_error {
  ExpectationError(const std::string& label, double value, double error, double tolerance);
  double value;
  double error;
  double tolerance;
};

// Evaluates E[f(X0, Z)], X0 ~ prior, Z ~ N(0, noise_var) independent. The
// quadrature method composes Gauss-Hermite in the Gaussian directions with
// exact spike handling and Gauss-Laguerre on the exponential slab; Monte Carlo
// is the sampling fallback used for cross-checks.
class ExpectationEngine {
 public:
  enum class Method { gauss_hermite, monte_carlo };

  // noise_nodes must be odd and >= 31 (applies to every Gauss-Hermite direction).
  static ExpectationEngine quadrature(int noise_nodes = 63, int slab_nodes = 256,
                                      double tolerance = 1e-9);
  static ExpectationEngine monte_carlo(std::int64_t samples, std::uint64_t seed,
                                       double tolerance = 1e-2);

  Method method() const { return method_; }
  double tolerance() const { return tolerance_; }

  double expect(const Prior& prior, double noise_var,
                const std::function<double(double, double)>& f) const;

  // As expect(), with an error estimate; throws ExpectationError (naming the
  // integral via `label`) when the estimate exceeds the engine tolerance.
  ExpectationResult expect_checked(const Prior& prior, double noise_var,
                                   const std::function<double(double, double)>& f,
                                   const std::string& label) const;

 private:
  ExpectationEngine() = default;

  double quad_expect(const Prior& prior, double noise_var,
                     const std::function<double(double, double)>& f, const QuadratureRule& gh,
                     const QuadratureRule& gl) const;

  Method method_ = Method::gauss_hermite;
  double tolerance_ = 1e-9;

  QuadratureRule gh_, gh_fine_;
  QuadratureRule gl_, gl_fine_;

  std::int64_t samples_ = 0;
  std::uint64_t seed_ = 0;
  mutable std::mt19937_64 rng_;  // owned by this engine; not shared across threads
};

}  // namespace iterfac
