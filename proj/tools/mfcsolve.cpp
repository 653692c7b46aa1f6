#include <CLI11.hpp>
#include <iostream>

#include "mfc/cli_io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mfcsolve: particle solver for constrained mean-field control with singular control"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int workers = 0;

  const std::pair<const char*, const char*> subs[] = {
      {"solve", "run the fixed-point solver and write residuals"},
      {"validate", "probe the model assumptions and report"},
      {"oracle", "cross-check against the discrete optimization oracle"},
      {"uniqueness", "solve from several starts and compare"},
      {"stability", "coupled two-run initial-law perturbation experiment"},
      {"bench", "run the full acceptance battery"},
  };
  for (const auto& [name, help] : subs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "path to the JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    sub->add_option("--seed", seed, "master seed (overrides config)");
    sub->add_option("--workers", workers, "worker thread count (overrides config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    mfc::RunConfig cfg = mfc::parse_config(config_path);
    if (sub->count("--seed")) cfg.solver.seed = seed;
    if (sub->count("--workers")) {
      if (workers < 1) throw mfc::ConfigError("--workers: must be at least 1");
      cfg.solver.workers = workers;
    }
    if (sub->count("--out")) cfg.out_dir = out_dir;
    return mfc::run(sub->get_name(), cfg, std::cout);
  } catch (const mfc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
