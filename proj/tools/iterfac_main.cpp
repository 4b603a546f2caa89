#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "iterfac/commands.hpp"
#include "iterfac/selfcheck.hpp"

int main(int argc, char** argv) {
  CLI::App app{"IterFac: rank-one matrix estimation in Gaussian noise with "
               "state-evolution predictions"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "run a Monte Carlo sweep and write sweep.csv / trials.jsonl");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--threads", threads, "worker threads (0 = auto)");
  run->add_flag("--quiet", quiet, "suppress progress output");

  CLI::App* se = app.add_subcommand("se-predict", "write state-evolution predictions (se.csv), no Monte Carlo");
  se->add_option("--config", config_path, "experiment config file")->required();
  se->add_option("--out", out_dir, "output directory")->required();
  se->add_flag("--quiet", quiet, "suppress progress output");

  double beta = 0.0, tau_u = 0.0, tau_v = 0.0;
  CLI::App* thr = app.add_subcommand("threshold", "print the recovery threshold tau_w* and its SNR");
  thr->add_option("beta", beta, "aspect ratio n/m")->required();
  thr->add_option("tau_u", tau_u, "second moment of the left factor components")->required();
  thr->add_option("tau_v", tau_v, "second moment of the right factor components")->required();

  bool flip_damping = false;
  CLI::App* check = app.add_subcommand("selfcheck", "run the fast property suite");
  check->add_flag("--inject-damping-sign-flip", flip_damping, "fault-injection fixture for tests")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : iterfac::kExitConfigError;
  }

  if (run->parsed())
    return iterfac::cmd_run(config_path, out_dir, threads, quiet, std::cout, std::cerr);
  if (se->parsed())
    return iterfac::cmd_se_predict(config_path, out_dir, quiet, std::cout, std::cerr);
  if (thr->parsed()) return iterfac::cmd_threshold(beta, tau_u, tau_v, std::cout, std::cerr);

  const iterfac::SelfcheckReport report =
      iterfac::run_selfcheck(iterfac::SelfcheckOptions{flip_damping});
  for (const auto& c : report.checks)
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail << ")\n";
  std::cout << (report.all_pass ? "selfcheck: all checks passed" : "selfcheck: FAILURES above")
            << "\n";
  return report.all_pass ? iterfac::kExitOk : iterfac::kExitSelfcheckFail;
}
