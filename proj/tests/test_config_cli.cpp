#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "iterfac/commands.hpp"
#include "iterfac/config_file.hpp"
#include "iterfac/rng.hpp"
#include "iterfac/textio.hpp"

using namespace iterfac;
namespace fs = std::filesystem;

namespace {

const std::string kValidConfig = R"(# sparse spike experiment
[problem]
m = 120
n = 60

[priors]
u = gaussian mean=0 variance=1
v = bernoulli_exp sparsity=0.1 rate=1

[rules]
families = linear, mmse

[sweep]
snr_db = 0, 5, 10
trials = 3
iters = 4
master_seed = 31
baseline = true
)";

ExperimentConfig random_config(std::mt19937_64& eng) {
  std::uniform_int_distribution<int> dim(2, 400);
  std::uniform_real_distribution<double> real01(0.01, 1.0);
  std::uniform_real_distribution<double> sym(-3.0, 3.0);
  std::uniform_int_distribution<int> small(1, 20);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> pick3(0, 2);

  ExperimentConfig cfg;
  cfg.m = dim(eng);
  cfg.n = dim(eng);
  auto rand_prior = [&]() -> Prior {
    switch (pick3(eng)) {
      case 0: return GaussianPrior{sym(eng), real01(eng) + 0.01};
      case 1: return BernoulliExpPrior{real01(eng), real01(eng) + 0.05};
      default: return PointMassPrior{sym(eng)};
    }
  };
  cfg.prior_u = rand_prior();
  cfg.prior_v = rand_prior();
  cfg.families.clear();
  const int nfam = 1 + pick3(eng);
  const RuleFamily all[] = {RuleFamily::linear, RuleFamily::mmse, RuleFamily::prox};
  for (int i = 0; i < nfam && i < 3; ++i) cfg.families.push_back(all[(i + pick3(eng)) % 3]);
  std::sort(cfg.families.begin(), cfg.families.end());
  cfg.families.erase(std::unique(cfg.families.begin(), cfg.families.end()), cfg.families.end());
  switch (pick3(eng)) {
    case 0: cfg.prox.cost_u = L1Cost{real01(eng)}; break;
    case 1: cfg.prox.cost_u = NonnegL1Cost{real01(eng)}; break;
    default: cfg.prox.cost_u = ZeroCost{}; break;
  }
  cfg.prox.cost_v = SquaredL2Cost{real01(eng)};
  cfg.prox.lambda_u = real01(eng) + 0.1;
  cfg.prox.lambda_v = real01(eng) + 0.1;
  double snr = sym(eng);
  cfg.snr_grid_db.clear();
  const int npts = small(eng);
  for (int i = 0; i < npts; ++i) {
    cfg.snr_grid_db.push_back(snr);
    snr += real01(eng) + 0.01;
  }
  cfg.trials = small(eng);
  cfg.iters = small(eng);
  cfg.master_seed = eng();
  cfg.baseline = coin(eng) == 1;
  cfg.random_init_v = coin(eng) == 1;
  cfg.normalize_factors = coin(eng) == 1;
  cfg.write_trials = coin(eng) == 1;
  return cfg;
}

int parse_error_line(const std::string& config_text) {
  try {
    parse_config_text(config_text, "test.ini");
    return -1;
  } catch (const ConfigError& e) {
    return e.line;
  }
}

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const char* bin = std::getenv("ITERFAC_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "ITERFAC_BIN must point at the CLI binary");
  const fs::path out = fs::temp_directory_path() / "iterfac_cli_capture.txt";
  const std::string cmd = std::string(bin) + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.output = read_text_file(out.string());
  return res;
}

fs::path write_temp_config(const std::string& text, const std::string& name) {
  const fs::path path = fs::temp_directory_path() / name;
  write_text_file(path.string(), text);
  return path;
}

}  // namespace

TEST_CASE("config parses and exposes the experiment") {
  const ExperimentConfig cfg = parse_config_text(kValidConfig);
  CHECK(cfg.m == 120);
  CHECK(cfg.n == 60);
  CHECK(cfg.families == std::vector<RuleFamily>{RuleFamily::linear, RuleFamily::mmse});
  CHECK(cfg.snr_grid_db == std::vector<double>{0.0, 5.0, 10.0});
  CHECK(cfg.trials == 3);
  CHECK(cfg.master_seed == 31);
  CHECK(cfg.baseline);
  CHECK_FALSE(cfg.random_init_v);
  CHECK(std::get<BernoulliExpPrior>(cfg.prior_v).sparsity == doctest::Approx(0.1));
}

TEST_CASE("config round-trips through serialization, 100 random configs") {
  std::mt19937_64 eng = make_engine(2024);
  for (int k = 0; k < 100; ++k) {
    const ExperimentConfig cfg = random_config(eng);
    const std::string text = serialize_config(cfg);
    const ExperimentConfig back = parse_config_text(text, "roundtrip");
    CHECK(config_equal(cfg, back));
    // serialization is a fixed point
    CHECK(serialize_config(back) == text);
  }
}

TEST_CASE("config errors carry line numbers and key context") {
  // unknown key in a known section (line 3)
  CHECK(parse_error_line("[problem]\nm = 4\nwhat = 3\n") == 3);
  // unknown section
  CHECK(parse_error_line("[warp]\nspeed = 9\n") == 1);
  // duplicate key
  CHECK(parse_error_line("[problem]\nm = 4\nm = 5\n") == 3);
  // malformed line
  CHECK(parse_error_line("[problem]\nm) 4\n") == 2);
  // key outside any section
  CHECK(parse_error_line("m = 4\n") == 1);
  // bad number
  CHECK(parse_error_line("[problem]\nm = four\n") == 2);

  try {
    parse_config_text("[problem]\nm = twelve\n", "bad.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bad.ini:2") != std::string::npos);
    CHECK(std::string(e.what()).find("'m'") != std::string::npos);
  }
}

TEST_CASE("master_seed is mandatory") {
  const std::string text = R"([problem]
m = 10
n = 10
[priors]
u = gaussian mean=0 variance=1
v = gaussian mean=0 variance=1
[rules]
families = linear
[sweep]
snr_db = 1
trials = 1
iters = 1
)";
  try {
    parse_config_text(text, "noseed.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("master_seed") != std::string::npos);
  }
}

TEST_CASE("snr grid range syntax expands inclusively") {
  const std::string text = std::string(kValidConfig);
  std::string ranged = text;
  ranged.replace(ranged.find("snr_db = 0, 5, 10"), std::string("snr_db = 0, 5, 10").size(),
                 "snr_db = -5:1:15");
  const ExperimentConfig cfg = parse_config_text(ranged);
  REQUIRE(cfg.snr_grid_db.size() == 21);
  CHECK(cfg.snr_grid_db.front() == doctest::Approx(-5.0));
  CHECK(cfg.snr_grid_db.back() == doctest::Approx(15.0));
  // non-increasing comma grids are rejected at validation
  std::string bad = text;
  bad.replace(bad.find("snr_db = 0, 5, 10"), std::string("snr_db = 0, 5, 10").size(),
              "snr_db = 5, 4");
  CHECK_THROWS_AS(parse_config_text(bad), ConfigError);
}

TEST_CASE("numeric formatting is fixed-width scientific with 12 significant digits") {
  CHECK(format_numeric(1.0) == "1.00000000000e+00");
  CHECK(format_numeric(0.05) == "5.00000000000e-02");
  CHECK(format_numeric(-1.0 / 3.0) == "-3.33333333333e-01");
  CHECK(format_numeric(12345) == "12345");
}

TEST_CASE("csv writer enforces the header width") {
  CsvWriter csv({"a", "b"});
  csv.add_row({"1", "2"});
  CHECK_THROWS_AS(csv.add_row({"1"}), std::invalid_argument);
  CHECK(csv.str() == "a,b\n1,2\n");
}

TEST_CASE("cli selfcheck passes quickly and the fault injection fails loudly") {
  const auto t0 = std::chrono::steady_clock::now();
  const CliResult ok = run_cli("selfcheck");
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(ok.exit_code == 0);
  CHECK(ok.output.find("all checks passed") != std::string::npos);
  CHECK(std::chrono::duration_cast<std::chrono::seconds>(elapsed).count() < 60);

  const CliResult bad = run_cli("selfcheck --inject-damping-sign-flip");
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("FAIL  damping-cross-pairing") != std::string::npos);
}

TEST_CASE("cli threshold prints the recovery boundary") {
  const CliResult res = run_cli("threshold 0.5 1 1");
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("7.07106781187e-01") != std::string::npos);
  CHECK(res.output.find("1.50514997832e+00") != std::string::npos);
  CHECK(run_cli("threshold -0.5 1 1").exit_code == 2);
  CHECK(run_cli("threshold 0.5 0 1").exit_code == 2);
}

TEST_CASE("cli run writes the sweep artifacts and exit codes") {
  const fs::path cfg = write_temp_config(kValidConfig, "iterfac_test_run.ini");
  const fs::path out = fs::temp_directory_path() / "iterfac_test_run_out";
  fs::remove_all(out);
  const CliResult res =
      run_cli("run --config " + cfg.string() + " --out " + out.string() + " --threads 2");
  CHECK(res.exit_code == 0);
  REQUIRE(fs::exists(out / "sweep.csv"));
  REQUIRE(fs::exists(out / "trials.jsonl"));

  const std::string csv = read_text_file((out / "sweep.csv").string());
  CHECK(csv.rfind("snr_db,method,iter,median_rho_u,median_rho_v,se_rho_u,se_rho_v,trials_ok,"
                  "trials_failed\n",
                  0) == 0);
  // 3 snr x (2 families x 5 rows + 1 svd row) + header
  const long lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + 3 * (2 * 5 + 1));

  const std::string jsonl = read_text_file((out / "trials.jsonl").string());
  CHECK(jsonl.find("\"trial\":") != std::string::npos);
  CHECK(jsonl.find("\"seed\":") != std::string::npos);
  CHECK(jsonl.find("\"rho_v\":") != std::string::npos);
  CHECK(jsonl.find("\"status\":\"ok\"") != std::string::npos);

  // malformed config: exit 2 with a line-numbered message
  const fs::path bad = write_temp_config("[problem]\nm = \xF0\x9F\x99\x82\n", "iterfac_bad.ini");
  const CliResult err = run_cli("run --config " + bad.string() + " --out " + out.string());
  CHECK(err.exit_code == 2);
  CHECK(err.output.find(":2:") != std::string::npos);

  const CliResult missing = run_cli("run --config /nonexistent.ini --out " + out.string());
  CHECK(missing.exit_code == 2);
}

TEST_CASE("cli se-predict emits the documented columns and closed-form values") {
  // nonzero-mean gaussian factors keep tau = 1 while seeding the recursion
  const std::string se_cfg = R"([problem]
m = 1000
n = 500

[priors]
u = gaussian mean=0 variance=1
v = gaussian mean=0.5 variance=0.75

[rules]
families = linear

[sweep]
snr_db = 3.0102999566398120, 400
trials = 1
iters = 60
master_seed = 5
)";
  const fs::path cfg = write_temp_config(se_cfg, "iterfac_se.ini");
  const fs::path out = fs::temp_directory_path() / "iterfac_se_out";
  fs::remove_all(out);
  const CliResult res = run_cli("se-predict --config " + cfg.string() + " --out " + out.string());
  CHECK(res.exit_code == 0);
  REQUIRE(fs::exists(out / "se.csv"));
  std::ifstream in(out / "se.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "snr_db,iter,rho_u,rho_v,alpha_u0,alpha_u1,alpha_v0,alpha_v1,lambda_u,lambda_v");
  // collect the final-iteration rows per snr point
  std::string line;
  double final_rho_u = -1, final_rho_v = -1, noiseless_rho_v = -1;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    if (cells[1] == 60.0 && std::abs(cells[0] - 3.0103) < 0.01) {
      final_rho_u = cells[2];
      final_rho_v = cells[3];
    }
    if (cells[1] == 60.0 && cells[0] == 400.0) noiseless_rho_v = cells[3];
  }
  // tau_w = 0.5 at beta = 0.5, tau_u = tau_v = 1: fixed point (0.25, 1/3)
  CHECK(std::abs(final_rho_u - 0.25) < 1e-8);
  CHECK(std::abs(final_rho_v - 1.0 / 3.0) < 1e-8);
  // effectively noiseless row converges to full correlation
  CHECK(std::abs(noiseless_rho_v - 1.0) < 1e-8);
}

TEST_CASE("cli se-predict reports the prior-mean start of the posterior-mean family") {
  const std::string se_cfg = R"([problem]
m = 1000
n = 500

[priors]
u = gaussian mean=0 variance=1
v = bernoulli_exp sparsity=0.1 rate=1

[rules]
families = mmse

[sweep]
snr_db = 5
trials = 1
iters = 3
master_seed = 5
)";
  const fs::path cfg = write_temp_config(se_cfg, "iterfac_se_mmse.ini");
  const fs::path out = fs::temp_directory_path() / "iterfac_se_mmse_out";
  fs::remove_all(out);
  REQUIRE(run_cli("se-predict --config " + cfg.string() + " --out " + out.string()).exit_code ==
          0);
  std::ifstream in(out / "se.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  std::stringstream ss(first);
  std::string cell;
  std::vector<double> cells;
  while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
  CHECK(cells[1] == 0.0);                      // iter 0
  CHECK(cells[3] == doctest::Approx(0.05));    // rho_v(0) = mean^2 / tau
}

TEST_CASE("cli run returns the degraded exit code when cells fail") {
  const std::string broken = R"([problem]
m = 262144
n = 262144

[priors]
u = gaussian mean=0 variance=1
v = gaussian mean=0 variance=1

[rules]
families = linear

[sweep]
snr_db = 0
trials = 2
iters = 2
master_seed = 3
)";
  const fs::path cfg = write_temp_config(broken, "iterfac_degraded.ini");
  const fs::path out = fs::temp_directory_path() / "iterfac_degraded_out";
  fs::remove_all(out);
  const CliResult res = run_cli("run --config " + cfg.string() + " --out " + out.string());
  CHECK(res.exit_code == 3);
  CHECK(res.output.find("degraded") != std::string::npos);
  CHECK(fs::exists(out / "sweep.csv"));  // artifacts are still written
}

TEST_CASE("cli se-predict writes one file per family and honors write_trials") {
  std::string cfg_text = kValidConfig;
  cfg_text += "\n[output]\nwrite_trials = false\n";
  const fs::path cfg = write_temp_config(cfg_text, "iterfac_multi.ini");
  const fs::path out = fs::temp_directory_path() / "iterfac_multi_out";
  fs::remove_all(out);
  CHECK(run_cli("se-predict --config " + cfg.string() + " --out " + out.string()).exit_code ==
        0);
  CHECK(fs::exists(out / "se_linear.csv"));
  CHECK(fs::exists(out / "se_mmse.csv"));
  CHECK_FALSE(fs::exists(out / "se.csv"));

  const fs::path run_out = fs::temp_directory_path() / "iterfac_multi_run_out";
  fs::remove_all(run_out);
  CHECK(run_cli("run --config " + cfg.string() + " --out " + run_out.string() + " --quiet")
            .exit_code == 0);
  CHECK(fs::exists(run_out / "sweep.csv"));
  CHECK_FALSE(fs::exists(run_out / "trials.jsonl"));
}

TEST_CASE("sweep csv bytes are identical across reruns of the same config") {
  const ExperimentConfig cfg = parse_config_text(kValidConfig);
  const std::string a = sweep_csv_text(run_sweep(cfg, SweepOptions{3, 1e-5}));
  const std::string b = sweep_csv_text(run_sweep(cfg, SweepOptions{1, 1e-5}));
  CHECK(a == b);
}
