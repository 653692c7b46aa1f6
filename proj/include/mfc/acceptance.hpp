#pragma once

#include <iosfwd>

#include "mfc/registry.hpp"

namespace mfc {

struct AcceptanceOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// End-to-end acceptance battery (10 checks). Prints one pass/fail line
/// per check to log as it completes. Deterministic for a fixed seed.
std::vector<AcceptanceOutcome> run_acceptance_suite(std::ostream& log, int workers = 1);

}  // namespace mfc
