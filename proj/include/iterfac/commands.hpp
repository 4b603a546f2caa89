#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "iterfac/montecarlo.hpp"

namespace iterfac {

// Exit codes: 0 ok, 1 selfcheck failure, 2 config error, 3 degraded sweep.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSelfcheckFail = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDegraded = 3;

// Runs the sweep described by the config and writes sweep.csv (+ trials.jsonl)
// into out_dir. Captures the sweep into *result when non-null.
int cmd_run(const std::string& config_path, const std::string& out_dir, int threads, bool quiet,
            std::ostream& out, std::ostream& err, SweepResult* result = nullptr);

// State-evolution prediction only; writes se.csv (one family) or
// se_<family>.csv (several families) into out_dir.
int cmd_se_predict(const std::string& config_path, const std::string& out_dir, bool quiet,
                   std::ostream& out, std::ostream& err);

int cmd_threshold(double beta, double tau_u, double tau_v, std::ostream& out, std::ostream& err);

std::string sweep_csv_text(const SweepResult& sweep);
std::string trials_jsonl_text(const SweepResult& sweep);

}  // namespace iterfac
