#include "iterfac/problem.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "iterfac/rng.hpp"

namespace iterfac {

namespace {
// Sub-seed streams drawn from the problem seed.
constexpr std::uint64_t kStreamU0 = 1;
constexpr std::uint64_t kStreamV0 = 2;
constexpr std::uint64_t kStreamNoise = 3;

// Dense problems beyond this entry count are rejected rather than allocated.
constexpr std::uint64_t kMaxEntries = 1ULL << 29;  // ~4 GiB of doubles
}  // namespace

Eigen::MatrixXd scaled_noise_matrix(Eigen::Index m, Eigen::Index n, double tau_w,
                                    std::uint64_t problem_seed) {
  std::mt19937_64 eng = make_engine(derive_seed(problem_seed, kStreamNoise));
  std::normal_distribution<double> dist(0.0, std::sqrt(static_cast<double>(m) * tau_w));
  Eigen::MatrixXd w(m, n);
  // Column-major fill, fixed traversal order for reproducibility.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) w(i, j) = dist(eng);
  return w;
}

RankOneProblem generate_problem(Eigen::Index m, Eigen::Index n, const Prior& prior_u,
                                const Prior& prior_v, double tau_w, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("generate_problem: dimensions must be >= 1");
  if (!(tau_w > 0.0)) throw std::invalid_argument("generate_problem: tau_w must be > 0");
  const std::uint64_t entries = static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(n);
  if (entries > kMaxEntries)
    throw std::invalid_argument("generate_problem: m*n too large for a dense instance");

  RankOneProblem prob;
  prob.m = m;
  prob.n = n;
  prob.tau_w = tau_w;
  prob.beta = static_cast<double>(n) / static_cast<double>(m);
  prob.seed = seed;
  prob.u0 = sample_prior(prior_u, m, derive_seed(seed, kStreamU0));
  prob.v0 = sample_prior(prior_v, n, derive_seed(seed, kStreamV0));
  prob.a = scaled_noise_matrix(m, n, tau_w, seed);
  prob.a.noalias() += prob.u0 * prob.v0.transpose();
  return prob;
}

RankOneProblem generate_problem_normalized(Eigen::Index m, Eigen::Index n, const Prior& prior_u,
                                           const Prior& prior_v, double tau_w,
                                           std::uint64_t seed) {
  RankOneProblem prob = generate_problem(m, n, prior_u, prior_v, tau_w, seed);
  prob.a.noalias() -= prob.u0 * prob.v0.transpose();
  const double target_u = static_cast<double>(m) * prior_second_moment(prior_u);
  const double target_v = static_cast<double>(n) * prior_second_moment(prior_v);
  const double nu = prob.u0.squaredNorm();
  const double nv = prob.v0.squaredNorm();
  if (nu > 0.0 && target_u > 0.0) prob.u0 *= std::sqrt(target_u / nu);
  if (nv > 0.0 && target_v > 0.0) prob.v0 *= std::sqrt(target_v / nv);
  prob.a.noalias() += prob.u0 * prob.v0.transpose();
  return prob;
}

double snr_to_tau_w(double snr_db, double tau_u, double tau_v) {
  if (!(tau_u > 0.0 && tau_v > 0.0))
    throw std::invalid_argument("snr_to_tau_w: tau_u and tau_v must be > 0");
  return tau_u * tau_v * std::pow(10.0, -snr_db / 10.0);
}

double tau_w_to_snr_db(double tau_w, double tau_u, double tau_v) {
  if (!(tau_u > 0.0 && tau_v > 0.0 && tau_w > 0.0))
    throw std::invalid_argument("tau_w_to_snr_db: arguments must be > 0");
  return 10.0 * std::log10(tau_u * tau_v / tau_w);
}

}  // namespace iterfac
