#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairgp/common.hpp"

namespace fairgp {

struct ValidationCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool passed() const;
  std::string to_text() const;  // one line per check, no timings
};

struct ValidationOptions {
  std::uint64_t seed = 1;
  bool corrupt_basis = false;  // fault injection: perturb E before the identity checks
  Index prop1_replicates = 64;
};

/// Runs the invariant suites: model-subspace identities, fair-subspace
/// orthogonality, the linear fairness Monte Carlo and its rate, evidence
/// gradients against finite differences, the posterior against dense
/// formulas, ascent monotonicity, and the EO/EOP block structure.
ValidationReport run_validation(const ValidationOptions& options);

}  // namespace fairgp
