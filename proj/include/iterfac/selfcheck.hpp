#pragma once

#include <string>
#include <vector>

namespace iterfac {

struct SelfcheckOptions {
  // Test fixture: corrupts the expected damping sign so the damping invariant
  // check must fail; exercises the failure path end to end.
  bool flip_damping_sign = false;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SelfcheckReport {
  std::vector<CheckResult> checks;
  bool all_pass = false;
};

// Fast property suite: prox vs grid oracle, derivatives vs finite differences,
// cross-engine expectation agreement, linear fixed-point identity, and the
// damping cross-pairing identity.
SelfcheckReport run_selfcheck(const SelfcheckOptions& opts = {});

}  // namespace iterfac
