#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stochwave {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;  // measured quantity
  double bound = 0.0;  // what it was compared against
};

struct SuiteResult {
  std::string suite;
  std::vector<VerifyCheck> checks;
  double seconds = 0.0;

  bool passed() const;
};

/// basis, yosida, noise, energy, ode.
const std::vector<std::string>& verify_suites();

/// Throws std::invalid_argument for an unknown suite name.
SuiteResult run_verify_suite(std::string_view name);

/// Machine-readable report of one or more suites.
std::string verify_report_json(const std::vector<SuiteResult>& results);

}  // namespace stochwave
