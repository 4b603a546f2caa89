#include "iterfac/expectation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "iterfac/rng.hpp"

namespace iterfac {

namespace {
std::string format_error(const std::string& label, double value, double error, double tolerance) {
  std::ostringstream os;
  os << "expectation '" << label << "' not converged: estimate " << value << ", error bound "
     << error << " > tolerance " << tolerance;
  return os.str();
}
}  // namespace

ExpectationError::ExpectationError(const std::string& label, double value_, double error_,
                                   double tolerance_)
    : std::runtime_error(format_error(label, value_, error_, tolerance_)),
      value(value_),
      error(error_),
      tolerance(tolerance_) {}

ExpectationEngine ExpectationEngine::quadrature(int noise_nodes, int slab_nodes,
                                                double tolerance) {
  if (noise_nodes < 31 || noise_nodes % 2 == 0)
    throw std::invalid_argument("ExpectationEngine: Gauss-Hermite node count must be odd and >= 31");
  if (slab_nodes < 16) throw std::invalid_argument("ExpectationEngine: slab node count too small");
  if (!(tolerance > 0.0)) throw std::invalid_argument("ExpectationEngine: tolerance must be > 0");
  ExpectationEngine e;
  e.method_ = Method::gauss_hermite;
  e.tolerance_ = tolerance;
  e.gh_ = gauss_hermite(noise_nodes);
  e.gh_fine_ = gauss_hermite(noise_nodes + 32);
  e.gl_ = gauss_laguerre(slab_nodes);
  e.gl_fine_ = gauss_laguerre(slab_nodes + slab_nodes / 2);
  return e;
}

ExpectationEngine ExpectationEngine::monte_carlo(std::int64_t samples, std::uint64_t seed,
                                                 double tolerance) {
  if (samples < 100000)
    throw std::invalid_argument("ExpectationEngine: Monte Carlo needs >= 1e5 samples");
  if (!(tolerance > 0.0)) throw std::invalid_argument("ExpectationEngine: tolerance must be > 0");
  ExpectationEngine e;
  e.method_ = Method::monte_carlo;
  e.tolerance_ = tolerance;
  e.samples_ = samples;
  e.seed_ = seed;
  e.rng_ = make_engine(seed);
  return e;
}

double ExpectationEngine::quad_expect(const Prior& prior, double noise_var,
                                      const std::function<double(double, double)>& f,
                                      const QuadratureRule& gh, const QuadratureRule& gl) const {
  const auto noise_avg = [&](double x0) {
    if (noise_var == 0.0) return f(x0, 0.0);
    return normal_expectation(gh, 0.0, noise_var, [&](double z) { return f(x0, z); });
  };
  if (const auto* g = std::get_if<GaussianPrior>(&prior))
    return normal_expectation(gh, g->mean, g->variance, noise_avg);
  if (const auto* b = std::get_if<BernoulliExpPrior>(&prior)) {
    const double atom = (b->sparsity < 1.0) ? (1.0 - b->sparsity) * noise_avg(0.0) : 0.0;
    const double slab = exponential_expectation(gl, b->rate, noise_avg);
    return atom + b->sparsity * slab;
  }
  return noise_avg(std::get<PointMassPrior>(prior).value);
}

double ExpectationEngine::expect(const Prior& prior, double noise_var,
                                 const std::function<double(double, double)>& f) const {
  if (!(noise_var >= 0.0)) throw std::invalid_argument("expect: noise_var must be >= 0");
  validate(prior);
  if (method_ == Method::gauss_hermite) return quad_expect(prior, noise_var, f, gh_, gl_);

  std::mt19937_64 eng = make_engine(derive_seed(seed_, rng_()));
  std::normal_distribution<double> noise(0.0, std::sqrt(noise_var));
  double acc = 0.0;
  // One prior draw per sample, streamed to keep memory flat.
  std::mt19937_64 prior_eng = make_engine(derive_seed(seed_, rng_()));
  Eigen::VectorXd block;
  constexpr Eigen::Index kBlock = 8192;
  Eigen::Index produced = 0;
  for (std::int64_t i = 0; i < samples_; ++i) {
    if (produced == 0) {
      block = sample_prior(prior, kBlock, derive_seed(seed_, prior_eng()));
      produced = kBlock;
    }
    const double x0 = block[kBlock - produced];
    --produced;
    acc += f(x0, noise_var > 0.0 ? noise(eng) : 0.0);
  }
  return acc / static_cast<double>(samples_);
}

ExpectationResult ExpectationEngine::expect_checked(const Prior& prior, double noise_var,
                                                    const std::function<double(double, double)>& f,
                                                    const std::string& label) const {
  if (!(noise_var >= 0.0)) throw std::invalid_argument("expect: noise_var must be >= 0");
  validate(prior);
  ExpectationResult res;
  if (method_ == Method::gauss_hermite) {
    const double coarse = quad_expect(prior, noise_var, f, gh_, gl_);
    const double fine = quad_expect(prior, noise_var, f, gh_fine_, gl_fine_);
    res.value = fine;
    res.error = std::abs(fine - coarse);
  } else {
    std::mt19937_64 eng = make_engine(derive_seed(seed_, rng_()));
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_var));
    std::mt19937_64 prior_eng = make_engine(derive_seed(seed_, rng_()));
    double acc = 0.0, acc2 = 0.0;
    Eigen::VectorXd block;
    constexpr Eigen::Index kBlock = 8192;
    Eigen::Index produced = 0;
    for (std::int64_t i = 0; i < samples_; ++i) {
      if (produced == 0) {
        block = sample_prior(prior, kBlock, derive_seed(seed_, prior_eng()));
        produced = kBlock;
      }
      const double x0 = block[kBlock - produced];
      --produced;
      const double val = f(x0, noise_var > 0.0 ? noise(eng) : 0.0);
      acc += val;
      acc2 += val * val;
    }
    const double mean = acc / static_cast<double>(samples_);
    const double var = std::max(0.0, acc2 / static_cast<double>(samples_) - mean * mean);
    res.value = mean;
    res.error = std::sqrt(var / static_cast<double>(samples_));
  }
  if (!std::isfinite(res.value)) throw ExpectationError(label, res.value, res.error, tolerance_);
  if (res.error > tolerance_) throw ExpectationError(label, res.value, res.error, tolerance_);
  return res;
}

}  // namespace iterfac
