#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "iterfac/prior.hpp"

namespace iterfac {

// Realized spiked instance A = u0 v0^T + sqrt(m) W, W_ij ~ N(0, tau_w).
struct RankOneProblem {
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Eigen::VectorXd u0;
  Eigen::VectorXd v0;
  Eigen::MatrixXd a;
  double tau_w = 0.0;
  double beta = 0.0;  // n/m
  std::uint64_t seed = 0;
};

// Noise term sqrt(m) W regenerated from the same sub-seed scheme as generate_problem.
Eigen::MatrixXd scaled_noise_matrix(Eigen::Index m, Eigen::Index n, double tau_w,
                                    std::uint64_t problem_seed);

RankOneProblem generate_problem(Eigen::Index m, Eigen::Index n, const Prior& prior_u,
                                const Prior& prior_v, double tau_w, std::uint64_t seed);

// Same draw, with u0 and v0 rescaled so the realized second moments equal the
// prior second moments exactly. Removes the dominant per-trial scale noise in
// sweep medians; an o(1) perturbation of the i.i.d. draw with the same
// empirical limits.
RankOneProblem generate_problem_normalized(Eigen::Index m, Eigen::Index n, const Prior& prior_u,
                                           const Prior& prior_v, double tau_w,
                                           std::uint64_t seed);

// tau_w = tau_u * tau_v * 10^(-snr_db/10)
double snr_to_tau_w(double snr_db, double tau_u, double tau_v);
double tau_w_to_snr_db(double tau_w, double tau_u, double tau_v);

}  // namespace iterfac
