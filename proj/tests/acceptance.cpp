#include <cstdlib>
#include <iostream>

#include "mfc/acceptance.hpp"

// Runs the full acceptance battery and prints one pass/fail line per
// criterion. Exit 0 only when every criterion passes.
int main(int argc, char** argv) {
  int workers = 1;
  if (argc > 1) workers = std::atoi(argv[1]);
  try {
    const auto outcomes = mfc::run_acceptance_suite(std::cout, workers);
    int failed = 0;
    for (const auto& oc : outcomes)
      if (!oc.passed) ++failed;
    std::cout << (outcomes.size() - static_cast<std::size_t>(failed)) << "/" << outcomes.size()
              << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance suite aborted: " << e.what() << std::endl;
    return 1;
  }
}
