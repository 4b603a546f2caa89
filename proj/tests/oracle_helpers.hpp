#pragma once

// Test-only oracles, independent of the library's computation paths.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace oracle {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_impl(const std::function<double(double)>& f, double a, double b,
                                    double fa, double fm, double fb, double whole, double tol,
                                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_impl(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                                  double tol = 1e-12, int depth = 40) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  return adaptive_simpson_impl(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb), tol, depth);
}

inline double normal_density(double x, double var) {
  return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var);
}

// Integrate over [lo, hi] in fixed panels so narrow bumps inside a wide
// interval cannot be missed by the top-level Simpson estimate.
inline double panel_quadrature(const std::function<double(double)>& f, double lo, double hi,
                               int panels, double tol, int depth = 24) {
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = lo + (hi - lo) * k / panels;
    const double b = lo + (hi - lo) * (k + 1) / panels;
    total += adaptive_quadrature(f, a, b, tol / panels, depth);
  }
  return total;
}

// Spike-and-slab posterior mean by direct numerical integration over the slab,
// x in [0, 40] as a hard support window (slab mass beyond is ~e^-40).
inline double bernoulli_exp_posterior_mean(double sparsity, double rate, double a, double s2,
                                           double p, double tol = 1e-13) {
  const auto slab0 = [&](double x) {
    return rate * std::exp(-rate * x) * normal_density(p - a * x, s2);
  };
  const auto slab1 = [&](double x) { return x * slab0(x); };
  const double i0 = panel_quadrature(slab0, 0.0, 40.0, 20, tol);
  const double i1 = panel_quadrature(slab1, 0.0, 40.0, 20, tol);
  const double w0 = (1.0 - sparsity) * normal_density(p, s2);
  return sparsity * i1 / (w0 + sparsity * i0);
}

// Scalar MMSE of the spike-and-slab prior at channel SNR eta via nested
// adaptive quadrature: E(eta) = tau - E[(E[X|Y])^2].
inline double bernoulli_exp_mmse(double sparsity, double rate, double eta) {
  const double tau = 2.0 * sparsity / (rate * rate);
  if (eta == 0.0) {
    const double mean = sparsity / rate;
    return tau - mean * mean;
  }
  const double a = std::sqrt(eta);
  const auto integrand = [&](double y) {
    // the slab factor vanishes past the Gaussian window around x = y/a and
    // past the exponential tail; trim the domain accordingly
    const double xmax =
        std::min(50.0 / rate, std::max(1.0, (y + 12.0) / a));
    const auto slab0 = [&](double x) {
      return rate * std::exp(-rate * x) * normal_density(y - a * x, 1.0);
    };
    const auto slab1 = [&](double x) { return x * slab0(x); };
    const double i0 = panel_quadrature(slab0, 0.0, xmax, 6, 1e-13);
    const double i1 = panel_quadrature(slab1, 0.0, xmax, 6, 1e-13);
    const double w0 = (1.0 - sparsity) * normal_density(y, 1.0);
    const double num = sparsity * i1;
    const double den = w0 + sparsity * i0;
    return (den > 1e-290) ? num * num / den : 0.0;
  };
  const double hi = 10.0 + a * 35.0;
  const double second = panel_quadrature(integrand, -10.0, hi, 12, 3e-11, 20);
  return tau - second;
}

inline double central_difference(const std::function<double(double)>& f, double x,
                                 double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Bisection root of g on [lo, hi]; requires a sign change.
inline double bisect(const std::function<double(double)>& g, double lo, double hi,
                     double tol = 1e-13) {
  double glo = g(lo);
  if (glo == 0.0) return lo;
  if (glo * g(hi) > 0.0) throw std::invalid_argument("bisect: no sign change");
  for (int i = 0; i < 200 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if (glo * gm < 0.0)
      hi = mid;
    else {
      lo = mid;
      glo = gm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
