#include "iterfac/commands.hpp"

#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "iterfac/config_file.hpp"
#include "iterfac/textio.hpp"

namespace iterfac {

namespace {

std::optional<ExperimentConfig> load_config(const std::string& path, std::ostream& err) {
  try {
    return parse_config_file(path);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return std::nullopt;
  }
}

bool prepare_out_dir(const std::string& out_dir, std::ostream& err) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    err << "cannot create output directory '" << out_dir << "': " << ec.message() << "\n";
    return false;
  }
  return true;
}

}  // namespace

std::string sweep_csv_text(const SweepResult& sweep) {
  CsvWriter csv({"snr_db", "method", "iter", "median_rho_u", "median_rho_v", "se_rho_u",
                 "se_rho_v", "trials_ok", "trials_failed"});
  for (const auto& cell : sweep.cells) {
    const std::size_t len = cell.median_rho_v.size();
    for (std::size_t t = 0; t < len; ++t) {
      // Single-row cells (svd) report the final iteration index.
      const int iter = (len == 1) ? sweep.config.iters : static_cast<int>(t);
      csv.add_row({format_numeric(cell.snr_db), cell.method, format_numeric(iter),
                   format_numeric(cell.median_rho_u[t]), format_numeric(cell.median_rho_v[t]),
                   format_numeric(cell.se_rho_u[t]), format_numeric(cell.se_rho_v[t]),
                   format_numeric(cell.trials_ok), format_numeric(cell.trials_failed)});
    }
  }
  return csv.str();
}

std::string trials_jsonl_text(const SweepResult& sweep) {
  std::string out;
  for (const auto& cell : sweep.cells) {
    for (const auto& rec : cell.trials) {
      nlohmann::ordered_json j;
      j["trial"] = rec.trial;
      j["seed"] = rec.seed;
      j["snr_db"] = cell.snr_db;
      j["method"] = cell.method;
      j["rho_u"] = rec.rho_u;
      j["rho_v"] = rec.rho_v;
      j["status"] = rec.status;
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int threads, bool quiet,
            std::ostream& out, std::ostream& err, SweepResult* result) {
  const auto config = load_config(config_path, err);
  if (!config) return kExitConfigError;
  if (!prepare_out_dir(out_dir, err)) return kExitConfigError;

  SweepOptions opts;
  opts.threads = threads;
  SweepResult sweep = run_sweep(*config, opts);

  const auto sweep_path = std::filesystem::path(out_dir) / "sweep.csv";
  write_text_file(sweep_path.string(), sweep_csv_text(sweep));
  if (config->write_trials) {
    const auto trials_path = std::filesystem::path(out_dir) / "trials.jsonl";
    write_text_file(trials_path.string(), trials_jsonl_text(sweep));
  }

  int failed_total = 0;
  for (const auto& cell : sweep.cells) failed_total += cell.trials_failed;
  if (!quiet) {
    out << "wrote " << sweep_path.string() << " (" << sweep.cells.size() << " cells, "
        << config->trials << " trials each";
    if (failed_total > 0) out << ", " << failed_total << " failed trial runs";
    out << ")\n";
  }
  const bool degraded = sweep.any_degraded;
  if (result != nullptr) *result = std::move(sweep);
  if (degraded) {
    err << "sweep degraded: more than 10% failed trials in at least one cell\n";
    return kExitDegraded;
  }
  return kExitOk;
}

int cmd_se_predict(const std::string& config_path, const std::string& out_dir, bool quiet,
                   std::ostream& out, std::ostream& err) {
  const auto config = load_config(config_path, err);
  if (!config) return kExitConfigError;
  if (!prepare_out_dir(out_dir, err)) return kExitConfigError;

  const double tau_u = prior_second_moment(config->prior_u);
  const double tau_v = prior_second_moment(config->prior_v);
  const ExpectationEngine engine = ExpectationEngine::quadrature(63, 256, 1e-6);

  for (RuleFamily family : config->families) {
    CsvWriter csv({"snr_db", "iter", "rho_u", "rho_v", "alpha_u0", "alpha_u1", "alpha_v0",
                   "alpha_v1", "lambda_u", "lambda_v"});
    for (double snr_db : config->snr_grid_db) {
      const double tau_w = snr_to_tau_w(snr_db, tau_u, tau_v);
      SEParams params{static_cast<double>(config->n) / static_cast<double>(config->m), tau_w,
                      config->prior_u, config->prior_v};

      SelectionRule rule_u = SelectionRule::linear(FactorSide::u);
      SelectionRule rule_v = SelectionRule::linear(FactorSide::v);
      LambdaPhi phi_u = phi_constant(1.0);
      LambdaPhi phi_v = phi_constant(1.0);
      if (family == RuleFamily::mmse) {
        rule_u = SelectionRule::mmse(config->prior_u, FactorSide::u);
        rule_v = SelectionRule::mmse(config->prior_v, FactorSide::v);
      } else if (family == RuleFamily::prox) {
        rule_u = SelectionRule::prox(config->prox.cost_u, FactorSide::u);
        rule_v = SelectionRule::prox(config->prox.cost_v, FactorSide::v);
        phi_u = phi_constant(config->prox.lambda_u);
        phi_v = phi_constant(config->prox.lambda_v);
      }

      SEState state =
          config->random_init_v
              ? se_initial_state_moments(params, 0.0, 0.0, 1.0)
              : se_initial_state(params, phi_u, prior_mean(config->prior_v), engine);
      try {
        for (int t = 0; t <= config->iters; ++t) {
          csv.add_row({format_numeric(snr_db), format_numeric(t), format_numeric(state.rho_u),
                       format_numeric(state.rho_v), format_numeric(state.alpha_u0),
                       format_numeric(state.alpha_u1), format_numeric(state.alpha_v0),
                       format_numeric(state.alpha_v1), format_numeric(state.lambda_u),
                       format_numeric(state.lambda_v)});
          if (t < config->iters)
            state = se_step(state, rule_u, rule_v, params, phi_u, phi_v, engine);
        }
      } catch (const std::exception& e) {
        err << "state evolution failed at snr " << snr_db << " dB (" << family_name(family)
            << "): " << e.what() << "\n";
        return kExitConfigError;
      }
    }
    const std::string name =
        (config->families.size() == 1) ? "se.csv" : "se_" + family_name(family) + ".csv";
    const auto path = std::filesystem::path(out_dir) / name;
    csv.write_file(path.string());
    if (!quiet) out << "wrote " << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_threshold(double beta, double tau_u, double tau_v, std::ostream& out, std::ostream& err) {
  if (!(beta > 0.0 && tau_u > 0.0 && tau_v > 0.0)) {
    err << "threshold: beta, tau_u, tau_v must all be > 0\n";
    return kExitConfigError;
  }
  const double tau_w_star = phase_transition_threshold(beta, tau_u, tau_v);
  const double snr_star = tau_w_to_snr_db(tau_w_star, tau_u, tau_v);
  out << "tau_w_star = " << format_numeric(tau_w_star) << "\n";
  out << "snr_star_db = " << format_numeric(snr_star) << "\n";
  return kExitOk;
}

}  // namespace iterfac
