#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mfc/cli_io.hpp"

using namespace mfc;

namespace {

nlohmann::json minimal_config() { return {{"problem", {{"family", "lq"}}}}; }

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
  const RunConfig cfg = parse_config_json(minimal_config());
  CHECK(cfg.family == "lq");
  CHECK(cfg.solver.theta == doctest::Approx(0.5));
  CHECK(cfg.solver.basis_degree == 2);
  CHECK(cfg.solver.N == 50);
  CHECK(cfg.solver.M == 500);
  CHECK(cfg.solver.mode == MultiplierMode::KKT);
  // params echo back with family defaults filled in
  CHECK(cfg.params.at("rho_u").get<double>() == 1.0);
}

TEST_CASE("config round-trips through write and parse") {
  nlohmann::json j = minimal_config();
  j["solver"] = {{"steps", 25}, {"particles", 300}, {"damping", 0.7}, {"mode", "fj"}};
  j["seed"] = 77;
  j["oracle"] = {{"steps", 12}};
  const RunConfig cfg = parse_config_json(j);
  const std::string path = "roundtrip_config_tmp.json";
  write_config(cfg, path);
  const RunConfig back = parse_config(path);
  std::remove(path.c_str());
  CHECK(back == cfg);
  CHECK(back.solver.mode == MultiplierMode::FJ);
  CHECK(back.solver.N == 25);
}

TEST_CASE("bound violations name the full key path") {
  nlohmann::json j = minimal_config();
  j["solver"] = {{"particles", -5}};
  CHECK_THROWS_WITH_AS(parse_config_json(j), doctest::Contains("solver.particles"),
                       ConfigError);
}

TEST_CASE("unknown keys get a nearest-key hint") {
  nlohmann::json j = minimal_config();
  j["solver"] = {{"particels", 100}};
  CHECK_THROWS_WITH_AS(parse_config_json(j), doctest::Contains("particles"), ConfigError);
}

TEST_CASE("missing config file is a config error") {
  CHECK_THROWS_AS(parse_config("no_such_file_here.json"), ConfigError);
}

TEST_CASE("residual csv uses the canonical header and full precision") {
  ResidualReport rep;
  ResidualRow row;
  row.iter = 1;
  row.vi = 1.0 / 3.0;
  row.cost = 2.0;
  rep.history.push_back(row);
  const std::string csv = residual_csv(rep);
  CHECK(csv.rfind("iter,vi,comp_state,comp_singular,dualfeas,primalfeas,bsde,"
                  "control_change,cost\n", 0) == 0);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);
  CHECK(csv.back() == '\n');
}
