#include "iterfac/special.hpp"

#include <cmath>
#include <stdexcept>

namespace iterfac {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kInvSqrt2Pi = 0.3989422804014327;   // 1/sqrt(2*pi)
constexpr double kSqrt2OverPi = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kInvSqrtPi = 0.5641895835477563;    // 1/sqrt(pi)

// Asymptotic series for erfcx at large x: 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k.
double erfcx_asymptotic(double x) {
  const double ix2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -(2.0 * k - 1.0) * ix2;
    sum += term;
  }
  return sum * kInvSqrtPi / x;
}
}  // namespace

double erfcx_positive(double x) {
  if (x < 0.0) throw std::domain_error("erfcx_positive: negative argument");
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  return erfcx_asymptotic(x);
}

double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double norm_logcdf(double z) {
  if (z > -1.0) return std::log(norm_cdf(z));
  return std::log(0.5 * erfcx_positive(-z / kSqrt2)) - 0.5 * z * z;
}

double mills_inv(double z) {
  if (z > 0.0) return norm_pdf(z) / norm_cdf(z);
  return kSqrt2OverPi / erfcx_positive(-z / kSqrt2);
}

double half_square_plus_logcdf(double z) {
  if (z > -1.0) return 0.5 * z * z + std::log(norm_cdf(z));
  return std::log(0.5 * erfcx_positive(-z / kSqrt2));
}

double log_sigmoid(double x) {
  if (x > 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace iterfac
