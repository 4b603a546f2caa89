#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "iterfac/commands.hpp"
#include "iterfac/montecarlo.hpp"
#include "iterfac/rng.hpp"

using namespace iterfac;

namespace {
ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.m = 80;
  cfg.n = 40;
  cfg.prior_u = GaussianPrior{0.0, 1.0};
  cfg.prior_v = BernoulliExpPrior{0.3, 1.0};
  cfg.families = {RuleFamily::linear, RuleFamily::mmse};
  cfg.snr_grid_db = {2.0, 8.0};
  cfg.trials = 6;
  cfg.iters = 5;
  cfg.master_seed = 99;
  cfg.baseline = true;
  return cfg;
}
}  // namespace

TEST_CASE("median definition") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5));
  CHECK(std::isnan(median({})));
}

TEST_CASE("family names round-trip") {
  for (RuleFamily f : {RuleFamily::linear, RuleFamily::mmse, RuleFamily::prox})
    CHECK(parse_family(family_name(f)) == f);
  CHECK_THROWS_AS(parse_family("cubist"), std::invalid_argument);
  CHECK(method_name(RuleFamily::mmse) == "iterfac-mmse");
}

TEST_CASE("config validation catches malformed experiments") {
  ExperimentConfig cfg = small_config();
  CHECK_NOTHROW(validate(cfg));
  cfg.snr_grid_db = {2.0, 2.0};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.trials = 0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.families = {RuleFamily::prox};
  cfg.prox.lambda_u = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = small_config();
  cfg.families.clear();
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("sweeps are deterministic across runs and thread counts") {
  const ExperimentConfig cfg = small_config();
  SweepOptions serial;
  serial.threads = 1;
  SweepOptions parallel;
  parallel.threads = 4;
  const SweepResult a = run_sweep(cfg, serial);
  const SweepResult b = run_sweep(cfg, parallel);
  CHECK(sweep_csv_text(a) == sweep_csv_text(b));
  CHECK(trials_jsonl_text(a) == trials_jsonl_text(b));
}

TEST_CASE("per-trial seeds are pairwise distinct and medians are order independent") {
  const SweepResult sweep = run_sweep(small_config(), SweepOptions{2, 1e-5});
  for (const auto& cell : sweep.cells) {
    for (std::size_t i = 0; i < cell.trials.size(); ++i)
      for (std::size_t j = i + 1; j < cell.trials.size(); ++j)
        CHECK(cell.trials[i].seed != cell.trials[j].seed);
    // shuffling the trial records does not change the median
    std::vector<double> finals;
    for (const auto& t : cell.trials) finals.push_back(t.rho_v.back());
    std::vector<double> shuffled = finals;
    std::shuffle(shuffled.begin(), shuffled.end(), make_engine(7));
    CHECK(median(finals) == median(shuffled));
    CHECK(cell.median_rho_v.back() == median(finals));
  }
}

TEST_CASE("single noiseless linear trial recovers the factors") {
  ExperimentConfig cfg = small_config();
  cfg.families = {RuleFamily::linear};
  cfg.snr_grid_db = {300.0};  // tau_w ~ 1e-30
  cfg.trials = 1;
  cfg.baseline = false;
  const SweepResult sweep = run_sweep(cfg, SweepOptions{1, 1e-5});
  CHECK(sweep.cells.size() == 1);
  CHECK(sweep.cells[0].median_rho_v.back() >= 1.0 - 1e-6);
}

TEST_CASE("baseline power iteration") {
  const RankOneProblem clean =
      generate_problem(60, 40, GaussianPrior{0.0, 1.0}, BernoulliExpPrior{0.3, 1.0}, 1e-30, 4);
  const BaselineResult b = svd_baseline(clean, 50);
  CHECK(b.rho_u >= 1.0 - 1e-8);
  CHECK(b.rho_v >= 1.0 - 1e-8);

  // transpose symmetry: swapping (u0, v0, A^T) swaps the correlations
  const RankOneProblem noisy =
      generate_problem(60, 40, GaussianPrior{0.0, 1.0}, BernoulliExpPrior{0.3, 1.0}, 0.05, 9);
  RankOneProblem transposed;
  transposed.m = noisy.n;
  transposed.n = noisy.m;
  transposed.u0 = noisy.v0;
  transposed.v0 = noisy.u0;
  transposed.a = noisy.a.transpose();
  transposed.tau_w = noisy.tau_w;
  transposed.beta = 1.0 / noisy.beta;
  transposed.seed = noisy.seed;
  const BaselineResult fwd = svd_baseline(noisy, 3000);
  const BaselineResult rev = svd_baseline(transposed, 3000);
  CHECK(fwd.rho_u == doctest::Approx(rev.rho_v).epsilon(1e-6));
  CHECK(fwd.rho_v == doctest::Approx(rev.rho_u).epsilon(1e-6));

  RankOneProblem zero;
  zero.m = 4;
  zero.n = 3;
  zero.a = Eigen::MatrixXd::Zero(4, 3);
  zero.u0 = Eigen::VectorXd::Ones(4);
  zero.v0 = Eigen::VectorXd::Ones(3);
  zero.seed = 1;
  CHECK_THROWS(svd_baseline(zero, 10));
  CHECK_THROWS_AS(svd_baseline(noisy, 0), std::invalid_argument);
}

TEST_CASE("compare_to_se reports zero deviation against itself") {
  SweepResult sweep = run_sweep(small_config(), SweepOptions{2, 1e-5});
  for (auto& cell : sweep.cells) {
    cell.median_rho_u = cell.se_rho_u;
    cell.median_rho_v = cell.se_rho_v;
  }
  const ComparisonReport report = compare_to_se(sweep, 0.05);
  CHECK(report.max_deviation == 0.0);
  CHECK(report.pass);
  CHECK(report.cells.size() == sweep.cells.size());
}

TEST_CASE("zero-mean priors with random init stay dark below threshold") {
  ExperimentConfig cfg;
  cfg.m = 1000;
  cfg.n = 500;
  cfg.prior_u = GaussianPrior{0.0, 1.0};
  cfg.prior_v = GaussianPrior{0.0, 1.0};
  cfg.families = {RuleFamily::mmse};
  cfg.snr_grid_db = {0.0};  // below the 1.505 dB threshold at beta = 0.5
  cfg.trials = 8;
  cfg.iters = 10;
  cfg.master_seed = 12;
  cfg.random_init_v = true;
  cfg.normalize_factors = true;
  const SweepResult below = run_sweep(cfg, SweepOptions{4, 1e-5});
  CHECK(below.cells[0].median_rho_v.back() < 0.1);

  // above threshold the baseline reaches the linear fixed point
  cfg.snr_grid_db = {6.0};
  cfg.baseline = true;
  const SweepResult above = run_sweep(cfg, SweepOptions{4, 1e-5});
  const SweepCell* svd = above.find(6.0, "svd");
  REQUIRE(svd != nullptr);
  const RhoPair fp = se_linear_fixed_point(0.5, 1.0, 1.0, snr_to_tau_w(6.0, 1.0, 1.0));
  CHECK(std::abs(svd->median_rho_v.back() - fp.rho_v) < 0.05);
}

TEST_CASE("failed trials are recorded and degrade the cell") {
  ExperimentConfig cfg = small_config();
  cfg.m = 1 << 18;   // m*n exceeds the dense-instance cap -> every trial fails
  cfg.n = 1 << 18;
  cfg.trials = 3;
  cfg.baseline = false;
  cfg.families = {RuleFamily::linear};
  const SweepResult sweep = run_sweep(cfg, SweepOptions{2, 1e-5});
  for (const auto& cell : sweep.cells) {
    CHECK(cell.trials_failed == 3);
    CHECK(cell.degraded);
    for (const auto& t : cell.trials) CHECK(t.status.find("error") == 0);
  }
  CHECK(sweep.any_degraded);
}

TEST_CASE("prox family sweeps run with constant adaptation and se predictions") {
  ExperimentConfig cfg = small_config();
  cfg.families = {RuleFamily::prox};
  cfg.prox.cost_u = ZeroCost{};
  cfg.prox.cost_v = NonnegL1Cost{0.1};
  cfg.prox.lambda_u = 1.0;
  cfg.prox.lambda_v = 1.0;
  cfg.baseline = false;
  cfg.trials = 4;
  const SweepResult sweep = run_sweep(cfg, SweepOptions{2, 1e-5});
  REQUIRE(sweep.cells.size() == 2);
  for (const auto& cell : sweep.cells) {
    CHECK(cell.trials_ok == 4);
    CHECK(cell.se_rho_v.size() == std::size_t(cfg.iters + 1));
    for (double r : cell.se_rho_v) {
      CHECK(r >= 0.0);
      CHECK(r <= 1.0 + 1e-12);
    }
  }
}
