#pragma once

#include <iosfwd>

#include "mfc/registry.hpp"

namespace mfc {

struct OracleConfig {
  int steps = 10;
  int particles = 200;
  int max_iter = 20000;
  double step_tol = 1e-8;
  int al_outer = 8;
  double al_rho = 10.0;
  double cost_tol = 0.05;  // relative cost gap accepted as a pass
};

struct RunConfig {
  std::string family = "lq";
  nlohmann::json params = nlohmann::json::object();  // normalized (defaults filled)
  SolverOptions solver;
  std::string out_dir;
  OracleConfig oracle;
  int uniqueness_starts = 3;
  double stability_mean_shift = 0.2;
  int validate_probes = 200;
};

/// Strict schema: unknown keys rejected with a nearest-key hint, bound
/// violations reported with their full key path. Defaults are filled in
/// so that parse_config(write_config(cfg)) == cfg.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& cfg);
void write_config(const RunConfig& cfg, const std::string& path);

bool operator==(const RunConfig& a, const RunConfig& b);
inline bool operator!=(const RunConfig& a, const RunConfig& b) { return !(a == b); }

/// Residual history in the canonical CSV layout (17 significant digits,
/// byte-stable across worker counts).
std::string residual_csv(const ResidualReport& report);

/// Executes one subcommand: solve, validate, oracle, uniqueness,
/// stability or bench. Writes manifest and result files under
/// cfg.out_dir when set. Returns the process exit code: 0 pass,
/// 3 not converged / failed checks (2 and 1 are mapped by the caller
/// from ConfigError and other exceptions).
int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log);

}  // namespace mfc
