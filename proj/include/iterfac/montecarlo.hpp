#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iterfac/iterfac.hpp"
#include "iterfac/problem.hpp"
#include "iterfac/state_evolution.hpp"

namespace iterfac {

enum class RuleFamily { linear, mmse, prox };

std::string family_name(RuleFamily family);     // "linear" / "mmse" / "prox"
std::string method_name(RuleFamily family);     // "iterfac-linear" / ...
RuleFamily parse_family(const std::string& s);  // throws on unknown name

struct ProxFamilyConfig {
  ScalarCost cost_u = ZeroCost{};
  ScalarCost cost_v = ZeroCost{};
  double lambda_u = 1.0;  // constant adaptation values for the prox family
  double lambda_v = 1.0;
};

struct ExperimentConfig {
  Eigen::Index m = 1000;
  Eigen::Index n = 500;
  Prior prior_u = GaussianPrior{0.0, 1.0};
  Prior prior_v = BernoulliExpPrior{0.1, 1.0};
  std::vector<RuleFamily> families = {RuleFamily::linear};
  ProxFamilyConfig prox;
  std::vector<double> snr_grid_db;
  int trials = 1;
  int iters = 10;
  std::uint64_t master_seed = 0;
  bool baseline = false;
  bool random_init_v = false;  // random-unit v(0) instead of the prior mean
  bool normalize_factors = false;  // rescale u0, v0 to exact second moments per trial
  bool write_trials = true;
};

void validate(const ExperimentConfig& config);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> rho_u;  // per iteration (svd baseline: single final value)
  std::vector<double> rho_v;
  std::string status = "ok";
  bool ok() const { return status == "ok"; }
};

struct SweepCell {
  double snr_db = 0.0;
  double tau_w = 0.0;
  std::string method;
  std::vector<double> median_rho_u;  // per iteration, over ok trials
  std::vector<double> median_rho_v;
  std::vector<double> se_rho_u;  // aligned state-evolution prediction
  std::vector<double> se_rho_v;
  int trials_ok = 0;
  int trials_failed = 0;
  bool degraded = false;  // >10% failed trials
  std::vector<TrialRecord> trials;
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<SweepCell> cells;
  bool any_degraded = false;
  const SweepCell* find(double snr_db, const std::string& method) const;
};

struct SweepOptions {
  int threads = 0;  // 0 = hardware concurrency
  double se_engine_tolerance = 1e-6;
};

// Runs trials x snr-grid x families (one shared problem instance per trial),
// attaches the matching state-evolution predictions, and aggregates medians.
// Deterministic in config.master_seed regardless of thread count.
SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& opts = {});

struct BaselineResult {
  Eigen::VectorXd u_hat;
  Eigen::VectorXd v_hat;
  double rho_u = 0.0;
  double rho_v = 0.0;
  int iterations = 0;
};

// Alternating power iteration toward the maximal singular pair, from a seeded
// random unit start (seed derived from the problem seed).
BaselineResult svd_baseline(const RankOneProblem& problem, int iters);

struct ComparisonCell {
  std::string method;
  double snr_db = 0.0;
  double deviation_rho_u = 0.0;  // |median - SE| at the final iteration
  double deviation_rho_v = 0.0;
};

struct ComparisonReport {
  std::vector<ComparisonCell> cells;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

ComparisonReport compare_to_se(const SweepResult& sweep, double tolerance);

// Median over the values (mean of the two central order statistics for even n).
double median(std::vector<double> values);

}  // namespace iterfac
