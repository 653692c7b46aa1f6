#pragma once

#include <optional>

#include "mfc/oracle.hpp"

#include <json.hpp>

namespace mfc {

/// Invalid or inconsistent configuration input (exit code 2 territory),
/// as opposed to SolverError which marks runtime numeric aborts.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FamilyInstance {
  ProblemSpec spec;
  std::optional<LQSpec> lq;  // set when a closed-form benchmark applies
  nlohmann::json effective_params;  // input params with defaults filled in
};

/// Instantiates a compiled-in coefficient family from its JSON parameter
/// block. Unknown parameter keys are rejected with a nearest-key hint.
FamilyInstance make_problem(const std::string& family, const nlohmann::json& params);

std::vector<std::string> registered_families();

int edit_distance(const std::string& a, const std::string& b);

/// Closest known key by edit distance, empty when nothing is plausible.
std::string nearest_key(const std::string& key, const std::vector<std::string>& known);

}  // namespace mfc
