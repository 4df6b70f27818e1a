#pragma once

#include <string>
#include <vector>

namespace curvwork::cli {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
  double seconds = 0.0;
};

/// NESS oracle, curvature, Stokes, symmetry cancellation, thermal exactness,
/// exact-form path independence, the constant-connection MC/PDE triangle and
/// determinism.
std::vector<CheckResult> run_selfcheck(unsigned threads = 1);

}  // namespace curvwork::cli
