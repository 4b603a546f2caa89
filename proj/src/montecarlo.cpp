#include "iterfac/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "iterfac/rng.hpp"

namespace iterfac {

namespace {
constexpr std::uint64_t kBaselineStream = 0xBA5EULL;
constexpr std::uint64_t kInitStream = 0x171ULL;
constexpr int kBaselineMaxIters = 1000;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 4;
}
}  // namespace

std::string family_name(RuleFamily family) {
  switch (family) {
    case RuleFamily::linear: return "linear";
    case RuleFamily::mmse: return "mmse";
    case RuleFamily::prox: return "prox";
  }
  throw std::logic_error("family_name: unknown family");
}

std::string method_name(RuleFamily family) { return "iterfac-" + family_name(family); }

RuleFamily parse_family(const std::string& s) {
  if (s == "linear") return RuleFamily::linear;
  if (s == "mmse") return RuleFamily::mmse;
  if (s == "prox") return RuleFamily::prox;
  throw std::invalid_argument("unknown rule family '" + s + "'");
}

void validate(const ExperimentConfig& config) {
  if (config.m < 1 || config.n < 1)
    throw std::invalid_argument("experiment config: dimensions must be >= 1");
  validate(config.prior_u);
  validate(config.prior_v);
  validate(config.prox.cost_u);
  validate(config.prox.cost_v);
  if (config.families.empty()) throw std::invalid_argument("experiment config: no rule families");
  if (config.trials < 1) throw std::invalid_argument("experiment config: trials must be >= 1");
  if (config.iters < 1) throw std::invalid_argument("experiment config: iters must be >= 1");
  if (config.snr_grid_db.empty())
    throw std::invalid_argument("experiment config: snr grid must be nonempty");
  for (std::size_t i = 1; i < config.snr_grid_db.size(); ++i)
    if (!(config.snr_grid_db[i] > config.snr_grid_db[i - 1]))
      throw std::invalid_argument("experiment config: snr grid must be strictly increasing");
  for (RuleFamily f : config.families) {
    if (f == RuleFamily::prox && !(config.prox.lambda_u > 0.0 && config.prox.lambda_v > 0.0))
      throw std::invalid_argument("experiment config: prox family needs lambda_u, lambda_v > 0");
  }
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

const SweepCell* SweepResult::find(double snr_db, const std::string& method) const {
  for (const auto& cell : cells)
    if (cell.method == method && std::abs(cell.snr_db - snr_db) < 1e-12) return &cell;
  return nullptr;
}

BaselineResult svd_baseline(const RankOneProblem& problem, int iters) {
  if (iters < 1) throw std::invalid_argument("svd_baseline: iters must be >= 1");
  std::mt19937_64 eng = make_engine(derive_seed(problem.seed, kBaselineStream));
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(problem.n);
  for (Eigen::Index j = 0; j < problem.n; ++j) v[j] = dist(eng);
  v.normalize();

  Eigen::VectorXd u(problem.m);
  double prev_align = -1.0;
  int used = 0;
  for (int k = 0; k < iters; ++k) {
    u.noalias() = problem.a * v;
    const double un = u.norm();
    if (un == 0.0) throw std::runtime_error("svd_baseline: A v vanished (zero matrix?)");
    u /= un;
    Eigen::VectorXd v_next = problem.a.transpose() * u;
    const double vn = v_next.norm();
    if (vn == 0.0) throw std::runtime_error("svd_baseline: A^T u vanished");
    v_next /= vn;
    const double align = std::abs(v_next.dot(v));
    v = std::move(v_next);
    used = k + 1;
    if (prev_align >= 0.0 && std::abs(align - 1.0) < 1e-14) break;
    prev_align = align;
  }
  BaselineResult res;
  res.rho_u = correlation(u, problem.u0);
  res.rho_v = correlation(v, problem.v0);
  res.u_hat = std::move(u);
  res.v_hat = std::move(v);
  res.iterations = used;
  return res;
}

namespace {

IterFacConfig family_engine_config(const ExperimentConfig& config, RuleFamily family,
                                   std::uint64_t trial_seed) {
  IterFacConfig ec;
  ec.max_iters = config.iters;
  ec.damping_mode = DampingMode::analysis;
  ec.lambda_mode = LambdaMode::analysis_average;
  ec.record_vectors = false;
  if (family == RuleFamily::prox) {
    ec.phi_lambda_u = phi_constant(config.prox.lambda_u);
    ec.phi_lambda_v = phi_constant(config.prox.lambda_v);
  }
  if (config.random_init_v)
    ec.init_v = InitV::random_unit(derive_seed(trial_seed, kInitStream));
  else
    ec.init_v = InitV::constant(prior_mean(config.prior_v));
  return ec;
}

std::pair<SelectionRule, SelectionRule> family_rules(const ExperimentConfig& config,
                                                     RuleFamily family) {
  switch (family) {
    case RuleFamily::linear:
      return {SelectionRule::linear(FactorSide::u), SelectionRule::linear(FactorSide::v)};
    case RuleFamily::mmse:
      return {SelectionRule::mmse(config.prior_u, FactorSide::u),
              SelectionRule::mmse(config.prior_v, FactorSide::v)};
    case RuleFamily::prox:
      return {SelectionRule::prox(config.prox.cost_u, FactorSide::u),
              SelectionRule::prox(config.prox.cost_v, FactorSide::v)};
  }
  throw std::logic_error("family_rules: unknown family");
}

// State-evolution rho curves aligned with the empirical per-iteration series.
void se_prediction(const ExperimentConfig& config, RuleFamily family, double tau_w,
                   const ExpectationEngine& engine, std::vector<double>& se_rho_u,
                   std::vector<double>& se_rho_v) {
  const double tau_u = prior_second_moment(config.prior_u);
  const double tau_v = prior_second_moment(config.prior_v);
  se_rho_u.assign(config.iters + 1, 0.0);
  se_rho_v.assign(config.iters + 1, 0.0);
  const double rho_v0 = config.random_init_v ? 0.0 : se_mmse_initial_rho_v(config.prior_v);
  se_rho_v[0] = rho_v0;

  if (family == RuleFamily::linear) {
    double rho_v = rho_v0;
    for (int t = 0; t < config.iters; ++t) {
      const RhoPair next = se_linear_recursion(rho_v, static_cast<double>(config.n) / config.m,
                                               tau_u, tau_v, tau_w);
      se_rho_u[t + 1] = next.rho_u;
      se_rho_v[t + 1] = next.rho_v;
      rho_v = next.rho_v;
    }
    return;
  }
  if (family == RuleFamily::mmse) {
    double rho_v = rho_v0;
    for (int t = 0; t < config.iters; ++t) {
      const RhoPair next = se_mmse_recursion(rho_v, static_cast<double>(config.n) / config.m,
                                             tau_w, config.prior_u, config.prior_v, engine);
      se_rho_u[t + 1] = next.rho_u;
      se_rho_v[t + 1] = next.rho_v;
      rho_v = next.rho_v;
    }
    return;
  }

  // Prox family: general recursion with the constant adaptation values.
  SEParams params{static_cast<double>(config.n) / config.m, tau_w, config.prior_u,
                  config.prior_v};
  auto [rule_u, rule_v] = family_rules(config, RuleFamily::prox);
  const LambdaPhi phi_u = phi_constant(config.prox.lambda_u);
  const LambdaPhi phi_v = phi_constant(config.prox.lambda_v);
  SEState state = config.random_init_v
                      ? se_initial_state_moments(params, 0.0, 0.0, config.prox.lambda_u)
                      : se_initial_state(params, phi_u, prior_mean(config.prior_v), engine);
  se_rho_v[0] = state.rho_v;
  for (int t = 0; t < config.iters; ++t) {
    state = se_step(state, rule_u, rule_v, params, phi_u, phi_v, engine);
    se_rho_u[t + 1] = state.rho_u;
    se_rho_v[t + 1] = state.rho_v;
  }
}

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& opts) {
  validate(config);
  const std::size_t n_snr = config.snr_grid_db.size();
  const std::size_t n_fam = config.families.size();
  const double tau_u = prior_second_moment(config.prior_u);
  const double tau_v = prior_second_moment(config.prior_v);

  // results[snr][family][trial]; baseline[snr][trial]
  std::vector<std::vector<std::vector<TrialRecord>>> results(
      n_snr, std::vector<std::vector<TrialRecord>>(n_fam, std::vector<TrialRecord>(config.trials)));
  std::vector<std::vector<TrialRecord>> baseline(
      config.baseline ? n_snr : 0, std::vector<TrialRecord>(config.trials));

  const std::size_t total_items = n_snr * static_cast<std::size_t>(config.trials);
  std::atomic<std::size_t> cursor{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t item = cursor.fetch_add(1);
      if (item >= total_items) return;
      const std::size_t snr_idx = item / config.trials;
      const int trial = static_cast<int>(item % config.trials);
      const double snr_db = config.snr_grid_db[snr_idx];
      const double tau_w = snr_to_tau_w(snr_db, tau_u, tau_v);
      const std::uint64_t seed =
          derive_seed(config.master_seed, snr_idx * 1000003ULL + static_cast<std::uint64_t>(trial) + 1ULL);

      RankOneProblem problem;
      bool generated = false;
      std::string gen_error;
      try {
        problem = config.normalize_factors
                      ? generate_problem_normalized(config.m, config.n, config.prior_u,
                                                    config.prior_v, tau_w, seed)
                      : generate_problem(config.m, config.n, config.prior_u, config.prior_v,
                                         tau_w, seed);
        generated = true;
      } catch (const std::exception& e) {
        gen_error = std::string("error: ") + e.what();
      }

      for (std::size_t f = 0; f < n_fam; ++f) {
        TrialRecord& rec = results[snr_idx][f][trial];
        rec.trial = trial;
        rec.seed = seed;
        if (!generated) {
          rec.status = gen_error;
          continue;
        }
        try {
          auto [rule_u, rule_v] = family_rules(config, config.families[f]);
          const IterFacConfig ec = family_engine_config(config, config.families[f], seed);
          const IterFacTrajectory traj = run_iterfac(problem, rule_u, rule_v, ec);
          rec.rho_u = traj.rho_u_series();
          rec.rho_v = traj.rho_v_series();
        } catch (const std::exception& e) {
          rec.status = std::string("error: ") + e.what();
        }
      }

      if (config.baseline) {
        TrialRecord& rec = baseline[snr_idx][trial];
        rec.trial = trial;
        rec.seed = seed;
        if (!generated) {
          rec.status = gen_error;
        } else {
          try {
            const BaselineResult b = svd_baseline(problem, kBaselineMaxIters);
            rec.rho_u = {b.rho_u};
            rec.rho_v = {b.rho_v};
          } catch (const std::exception& e) {
            rec.status = std::string("error: ") + e.what();
          }
        }
      }
    }
  };

  const int n_threads = std::min<std::size_t>(resolve_threads(opts.threads), total_items);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const ExpectationEngine se_engine =
      ExpectationEngine::quadrature(63, 256, opts.se_engine_tolerance);

  SweepResult sweep;
  sweep.config = config;

  auto aggregate = [&](std::vector<TrialRecord>&& recs, double snr_db, double tau_w,
                       const std::string& method, std::size_t series_len) {
    SweepCell cell;
    cell.snr_db = snr_db;
    cell.tau_w = tau_w;
    cell.method = method;
    cell.median_rho_u.resize(series_len);
    cell.median_rho_v.resize(series_len);
    for (std::size_t t = 0; t < series_len; ++t) {
      std::vector<double> us, vs;
      for (const auto& r : recs) {
        if (!r.ok()) continue;
        us.push_back(r.rho_u[t]);
        vs.push_back(r.rho_v[t]);
      }
      cell.median_rho_u[t] = median(std::move(us));
      cell.median_rho_v[t] = median(std::move(vs));
    }
    for (const auto& r : recs) (r.ok() ? cell.trials_ok : cell.trials_failed)++;
    cell.degraded = cell.trials_failed * 10 > config.trials;
    cell.trials = std::move(recs);
    return cell;
  };

  for (std::size_t s = 0; s < n_snr; ++s) {
    const double snr_db = config.snr_grid_db[s];
    const double tau_w = snr_to_tau_w(snr_db, tau_u, tau_v);
    for (std::size_t f = 0; f < n_fam; ++f) {
      SweepCell cell = aggregate(std::move(results[s][f]), snr_db, tau_w,
                                 method_name(config.families[f]), config.iters + 1);
      se_prediction(config, config.families[f], tau_w, se_engine, cell.se_rho_u, cell.se_rho_v);
      sweep.any_degraded = sweep.any_degraded || cell.degraded;
      sweep.cells.push_back(std::move(cell));
    }
    if (config.baseline) {
      SweepCell cell = aggregate(std::move(baseline[s]), snr_db, tau_w, "svd", 1);
      const RhoPair fp =
          se_linear_fixed_point(static_cast<double>(config.n) / config.m, tau_u, tau_v, tau_w);
      cell.se_rho_u = {fp.rho_u};
      cell.se_rho_v = {fp.rho_v};
      sweep.any_degraded = sweep.any_degraded || cell.degraded;
      sweep.cells.push_back(std::move(cell));
    }
  }
  return sweep;
}

ComparisonReport compare_to_se(const SweepResult& sweep, double tolerance) {
  ComparisonReport report;
  report.tolerance = tolerance;
  for (const auto& cell : sweep.cells) {
    ComparisonCell c;
    c.method = cell.method;
    c.snr_db = cell.snr_db;
    c.deviation_rho_u = std::abs(cell.median_rho_u.back() - cell.se_rho_u.back());
    c.deviation_rho_v = std::abs(cell.median_rho_v.back() - cell.se_rho_v.back());
    report.max_deviation =
        std::max({report.max_deviation, c.deviation_rho_u, c.deviation_rho_v});
    report.cells.push_back(std::move(c));
  }
  report.pass = report.max_deviation <= tolerance;
  return report;
}

}  // namespace iterfac
