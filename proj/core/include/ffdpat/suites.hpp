#pragma once

#include <string>
#include <vector>

#include "ffdpat/config.hpp"

namespace ffdpat {

struct SuiteCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct SuiteOutcome {
  std::string name;
  std::vector<SuiteCheck> checks;
  /// Values recorded without a pass/fail decision.
  std::vector<std::pair<std::string, double>> recorded;

  bool passed() const;
  std::string to_json() const;
};

/// adjoint, planewave, fbp-roundtrip, full-A, full-B, full-C, full-D, wrong-speed
std::vector<std::string> suite_names();

/// Runs a named scenario on top of `base` (grid size, CG settings, radon
/// settings). Throws ConfigError for an unknown name.
SuiteOutcome run_suite(const std::string& name, const ExperimentConfig& base);

}  // namespace ffdpat
