#include "mfc/cli_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfc/acceptance.hpp"

namespace mfc {

namespace {

/// Strict reader over one JSON object level: every accepted key is
/// recorded so finish() can flag leftovers with a nearest-key hint.
class JsonReader {
 public:
  JsonReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object() && !j_.is_null()) throw ConfigError(path_ + ": expected an object");
  }

  double num(const std::string& key, double def) {
    const nlohmann::json* v = fetch(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(at(key) + ": expected a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int def) {
    const nlohmann::json* v = fetch(key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(at(key) + ": expected an integer");
    return v->get<int>();
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    const nlohmann::json* v = fetch(key);
    if (!v) return def;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                    v->get<std::int64_t>() < 0))
      throw ConfigError(at(key) + ": expected a nonnegative integer");
    return v->get<std::uint64_t>();
  }

  std::string str(const std::string& key, const std::string& def) {
    const nlohmann::json* v = fetch(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(at(key) + ": expected a string");
    return v->get<std::string>();
  }

  const nlohmann::json* obj(const std::string& key) {
    const nlohmann::json* v = fetch(key);
    if (v && !v->is_object()) throw ConfigError(at(key) + ": expected an object");
    return v;
  }

  void finish() const {
    if (j_.is_null()) return;
    for (const auto& item : j_.items()) {
      if (std::find(allowed_.begin(), allowed_.end(), item.key()) == allowed_.end()) {
        std::string msg = at(item.key()) + ": unknown key";
        const std::string hint = nearest_key(item.key(), allowed_);
        if (!hint.empty()) msg += " (did you mean \"" + hint + "\"?)";
        throw ConfigError(msg);
      }
    }
  }

 private:
  const nlohmann::json* fetch(const std::string& key) {
    allowed_.push_back(key);
    if (j_.is_null() || !j_.contains(key)) return nullptr;
    return &j_.at(key);
  }
  std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const nlohmann::json& j_;
  std::string path_;
  std::vector<std::string> allowed_;
};

const nlohmann::json kNull;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open output file " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

RunConfig parse_config_json(const nlohmann::json& j) {
  RunConfig cfg;
  JsonReader top(j, "");

  const nlohmann::json* problem = top.obj("problem");
  require(problem != nullptr, "problem: required section is missing");
  {
    JsonReader p(*problem, "problem");
    cfg.family = p.str("family", "");
    require(!cfg.family.empty(), "problem.family: required key is missing");
    const nlohmann::json* params = p.obj("params");
    p.finish();
    // instantiating validates the parameter block and fills defaults
    FamilyInstance inst = make_problem(cfg.family, params ? *params : kNull);
    cfg.params = inst.effective_params;
  }

  {
    const nlohmann::json* solver = top.obj("solver");
    JsonReader s(solver ? *solver : kNull, "solver");
    cfg.solver.N = s.integer("steps", cfg.solver.N);
    cfg.solver.M = s.integer("particles", cfg.solver.M);
    cfg.solver.theta = s.num("damping", cfg.solver.theta);
    cfg.solver.max_outer = s.integer("max_outer", cfg.solver.max_outer);
    cfg.solver.tol_vi = s.num("tol_vi", cfg.solver.tol_vi);
    cfg.solver.tol_comp = s.num("tol_comp", cfg.solver.tol_comp);
    cfg.solver.tol_bsde = s.num("tol_bsde", cfg.solver.tol_bsde);
    cfg.solver.tol_fix = s.num("tol_fix", cfg.solver.tol_fix);
    const std::string mode = s.str("mode", "kkt");
    cfg.solver.basis_degree = s.integer("basis_degree", cfg.solver.basis_degree);
    cfg.solver.inner_picard_sweeps = s.integer("inner_picard_sweeps", cfg.solver.inner_picard_sweeps);
    cfg.solver.rho_eta = s.num("rho_eta", cfg.solver.rho_eta);
    cfg.solver.rho_zeta = s.num("rho_zeta", cfg.solver.rho_zeta);
    cfg.solver.uhat_tol = s.num("uhat_tol", cfg.solver.uhat_tol);
    cfg.solver.uhat_max_iter = s.integer("uhat_max_iter", cfg.solver.uhat_max_iter);
    s.finish();

    require(cfg.solver.N >= 1, "solver.steps: must be at least 1");
    require(cfg.solver.M >= 1, "solver.particles: must be at least 1");
    require(cfg.solver.theta > 0 && cfg.solver.theta <= 1, "solver.damping: must be in (0, 1]");
    require(cfg.solver.max_outer >= 1, "solver.max_outer: must be at least 1");
    require(cfg.solver.tol_vi > 0, "solver.tol_vi: must be positive");
    require(cfg.solver.tol_comp > 0, "solver.tol_comp: must be positive");
    require(cfg.solver.tol_bsde > 0, "solver.tol_bsde: must be positive");
    require(cfg.solver.tol_fix > 0, "solver.tol_fix: must be positive");
    require(cfg.solver.basis_degree >= 1 && cfg.solver.basis_degree <= 4,
            "solver.basis_degree: must be in [1, 4]");
    require(cfg.solver.inner_picard_sweeps >= 1 && cfg.solver.inner_picard_sweeps <= 5,
            "solver.inner_picard_sweeps: must be in [1, 5]");
    if (mode == "kkt")
      cfg.solver.mode = MultiplierMode::KKT;
    else if (mode == "fj")
      cfg.solver.mode = MultiplierMode::FJ;
    else
      throw ConfigError("solver.mode: must be \"kkt\" or \"fj\"");
  }

  cfg.solver.seed = top.u64("seed", cfg.solver.seed);
  cfg.solver.workers = top.integer("workers", cfg.solver.workers);
  require(cfg.solver.workers >= 1, "workers: must be at least 1");
  cfg.out_dir = top.str("out", "");

  {
    const nlohmann::json* oracle = top.obj("oracle");
    JsonReader o(oracle ? *oracle : kNull, "oracle");
    cfg.oracle.steps = o.integer("steps", cfg.oracle.steps);
    cfg.oracle.particles = o.integer("particles", cfg.oracle.particles);
    cfg.oracle.max_iter = o.integer("max_iter", cfg.oracle.max_iter);
    cfg.oracle.step_tol = o.num("step_tol", cfg.oracle.step_tol);
    cfg.oracle.al_outer = o.integer("al_outer", cfg.oracle.al_outer);
    cfg.oracle.al_rho = o.num("al_rho", cfg.oracle.al_rho);
    cfg.oracle.cost_tol = o.num("cost_tol", cfg.oracle.cost_tol);
    o.finish();
    require(cfg.oracle.steps >= 1 && cfg.oracle.steps <= 20, "oracle.steps: must be in [1, 20]");
    require(cfg.oracle.particles >= 1 && cfg.oracle.particles <= 500,
            "oracle.particles: must be in [1, 500]");
    require(cfg.oracle.max_iter >= 1, "oracle.max_iter: must be at least 1");
    require(cfg.oracle.al_rho > 0, "oracle.al_rho: must be positive");
  }

  {
    const nlohmann::json* uq = top.obj("uniqueness");
    JsonReader u(uq ? *uq : kNull, "uniqueness");
    cfg.uniqueness_starts = u.integer("starts", cfg.uniqueness_starts);
    u.finish();
    require(cfg.uniqueness_starts >= 2, "uniqueness.starts: must be at least 2");
  }
  {
    const nlohmann::json* st = top.obj("stability");
    JsonReader s(st ? *st : kNull, "stability");
    cfg.stability_mean_shift = s.num("mean_shift", cfg.stability_mean_shift);
    s.finish();
  }
  {
    const nlohmann::json* va = top.obj("validate");
    JsonReader v(va ? *va : kNull, "validate");
    cfg.validate_probes = v.integer("probes", cfg.validate_probes);
    v.finish();
    require(cfg.validate_probes >= 1, "validate.probes: must be at least 1");
  }

  top.finish();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config_json(j);
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["problem"]["family"] = cfg.family;
  j["problem"]["params"] = cfg.params;
  auto& s = j["solver"];
  s["steps"] = cfg.solver.N;
  s["particles"] = cfg.solver.M;
  s["damping"] = cfg.solver.theta;
  s["max_outer"] = cfg.solver.max_outer;
  s["tol_vi"] = cfg.solver.tol_vi;
  s["tol_comp"] = cfg.solver.tol_comp;
  s["tol_bsde"] = cfg.solver.tol_bsde;
  s["tol_fix"] = cfg.solver.tol_fix;
  s["mode"] = cfg.solver.mode == MultiplierMode::KKT ? "kkt" : "fj";
  s["basis_degree"] = cfg.solver.basis_degree;
  s["inner_picard_sweeps"] = cfg.solver.inner_picard_sweeps;
  s["rho_eta"] = cfg.solver.rho_eta;
  s["rho_zeta"] = cfg.solver.rho_zeta;
  s["uhat_tol"] = cfg.solver.uhat_tol;
  s["uhat_max_iter"] = cfg.solver.uhat_max_iter;
  j["seed"] = cfg.solver.seed;
  j["workers"] = cfg.solver.workers;
  j["out"] = cfg.out_dir;
  auto& o = j["oracle"];
  o["steps"] = cfg.oracle.steps;
  o["particles"] = cfg.oracle.particles;
  o["max_iter"] = cfg.oracle.max_iter;
  o["step_tol"] = cfg.oracle.step_tol;
  o["al_outer"] = cfg.oracle.al_outer;
  o["al_rho"] = cfg.oracle.al_rho;
  o["cost_tol"] = cfg.oracle.cost_tol;
  j["uniqueness"]["starts"] = cfg.uniqueness_starts;
  j["stability"]["mean_shift"] = cfg.stability_mean_shift;
  j["validate"]["probes"] = cfg.validate_probes;
  return j;
}

void write_config(const RunConfig& cfg, const std::string& path) {
  write_json(path, to_json(cfg));
}

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

std::string residual_csv(const ResidualReport& report) {
  std::string out = "iter,vi,comp_state,comp_singular,dualfeas,primalfeas,bsde,control_change,cost\n";
  for (const auto& r : report.history) {
    out += std::to_string(r.iter);
    for (double v : {r.vi, r.comp_state, r.comp_singular, r.dualfeas, r.primalfeas, r.bsde,
                     r.control_change, r.cost}) {
      out += ',';
      out += fmt17(v);
    }
    out += '\n';
  }
  return out;
}

namespace {

nlohmann::json summary_json(const std::string& family, const Solution& sol) {
  nlohmann::json j;
  j["family"] = family;
  j["exit_status"] = sol.report.exit_status;
  j["iterations"] = sol.report.history.size();
  j["cost"] = sol.cost;
  j["int_phi_eta"] = sol.int_phi_eta;
  j["r0"] = sol.multipliers.r0;
  if (!sol.report.history.empty()) {
    const auto& r = sol.report.history.back();
    j["final"]["vi"] = r.vi;
    j["final"]["comp_state"] = r.comp_state;
    j["final"]["comp_singular"] = r.comp_singular;
    j["final"]["dualfeas"] = r.dualfeas;
    j["final"]["primalfeas"] = r.primalfeas;
    j["final"]["bsde"] = r.bsde;
    j["final"]["control_change"] = r.control_change;
  }
  return j;
}

}  // namespace

int run(const std::string& subcommand, const RunConfig& cfg, std::ostream& log) {
  static const std::vector<std::string> kSubcommands = {"solve",      "validate",  "oracle",
                                                        "uniqueness", "stability", "bench"};
  if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end()) {
    std::string msg = "unknown subcommand \"" + subcommand + "\"";
    const std::string hint = nearest_key(subcommand, kSubcommands);
    if (!hint.empty()) msg += " (did you mean \"" + hint + "\"?)";
    throw ConfigError(msg);
  }

  FamilyInstance inst = make_problem(cfg.family, cfg.params);

  const bool persist = !cfg.out_dir.empty();
  std::filesystem::path out(cfg.out_dir);
  if (persist) {
    std::filesystem::create_directories(out);
    nlohmann::json manifest;
    manifest["tool"] = "mfcsolve";
    manifest["version"] = "0.1.0";
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["subcommand"] = subcommand;
    manifest["seed"] = cfg.solver.seed;
    manifest["config"] = to_json(cfg);
    write_json(out / "manifest.json", manifest);
  }

  if (subcommand == "solve") {
    Solution sol = solve(inst.spec, cfg.solver);
    log << "solve: " << sol.report.exit_status << " after " << sol.report.history.size()
        << " iterations, cost " << sol.cost << "\n";
    if (persist) {
      write_text(out / "residuals.csv", residual_csv(sol.report));
      write_json(out / "summary.json", summary_json(cfg.family, sol));
    }
    return sol.report.converged() ? 0 : 3;
  }

  if (subcommand == "validate") {
    ValidationReport rep = validate_spec(inst.spec, cfg.validate_probes, cfg.solver.seed);
    nlohmann::json j;
    for (const auto& p : rep.probes) {
      nlohmann::json pj;
      pj["name"] = p.name;
      pj["checked"] = p.checked;
      pj["passed"] = p.passed;
      pj["worst"] = p.worst;
      pj["detail"] = p.detail;
      j["probes"].push_back(pj);
      log << "validate: " << p.name << " "
          << (!p.checked ? "skipped" : p.passed ? "ok" : "FAILED") << "\n";
    }
    j["lipschitz_hat"] = rep.lipschitz_hat;
    j["monotone_beta_hat"] = rep.monotone_beta_hat;
    j["best_effort"] = rep.best_effort;
    if (persist) write_json(out / "validation.json", j);
    return rep.all_passed() ? 0 : 3;
  }

  if (subcommand == "oracle") {
    SolverOptions so = cfg.solver;
    so.N = cfg.oracle.steps;
    so.M = cfg.oracle.particles;
    Solution sol = solve(inst.spec, so);
    NlpOptions no;
    no.max_iter = cfg.oracle.max_iter;
    no.step_tol = cfg.oracle.step_tol;
    no.al_outer = cfg.oracle.al_outer;
    no.al_rho = cfg.oracle.al_rho;
    no.workers = cfg.solver.workers;
    NlpResult nlp = discrete_nlp(inst.spec, so.N, so.M, so.seed, no);
    GapReport gap = compare(sol, nlp);
    nlohmann::json j;
    j["solver_cost"] = sol.cost;
    j["solver_status"] = sol.report.exit_status;
    j["nlp_cost"] = nlp.cost;
    j["nlp_converged"] = nlp.converged;
    j["nlp_iterations"] = nlp.iterations;
    j["cost_gap_rel"] = gap.cost_gap_rel;
    j["control_rms_gap"] = gap.control_rms_gap;
    j["eta_active_agreement"] = gap.eta_active_agreement;
    j["dzeta_active_agreement"] = gap.dzeta_active_agreement;
    if (inst.lq) {
      const TimeGrid grid{so.N, inst.spec.T};
      j["riccati_cost"] = riccati_lq(*inst.lq, grid).cost;
    }
    log << "oracle: solver cost " << sol.cost << ", nlp cost " << nlp.cost << ", relative gap "
        << gap.cost_gap_rel << "\n";
    if (persist) write_json(out / "oracle_gap.json", j);
    return sol.report.converged() && gap.cost_gap_rel <= cfg.oracle.cost_tol ? 0 : 3;
  }

  if (subcommand == "uniqueness") {
    UniquenessResult ur = uniqueness_probe(inst.spec, cfg.solver, cfg.uniqueness_starts);
    nlohmann::json j;
    j["max_pairwise_distance"] = ur.max_pairwise_distance;
    j["start_converged"] = ur.start_converged;
    log << "uniqueness: max pairwise distance " << ur.max_pairwise_distance << "\n";
    if (persist) write_json(out / "uniqueness.json", j);
    const bool all_conv =
        std::all_of(ur.start_converged.begin(), ur.start_converged.end(), [](bool b) { return b; });
    return all_conv ? 0 : 3;
  }

  if (subcommand == "stability") {
    auto base = inst.spec.sample_initial;
    const double shift = cfg.stability_mean_shift;
    auto shifted = [base, shift](std::mt19937_64& gen) {
      Vec v = base(gen);
      v.array() += shift;
      return v;
    };
    StabilityResult st = stability_probe(inst.spec, cfg.solver, base, shifted);
    nlohmann::json j;
    j["numerator"] = st.numerator;
    j["denominator"] = st.denominator;
    j["ratio"] = st.ratio;
    j["both_converged"] = st.both_converged;
    log << "stability: ratio " << st.ratio << "\n";
    if (persist) write_json(out / "stability.json", j);
    return st.both_converged && std::isfinite(st.ratio) ? 0 : 3;
  }

  // bench
  auto outcomes = run_acceptance_suite(log, cfg.solver.workers);
  nlohmann::json j;
  bool all = true;
  for (const auto& oc : outcomes) {
    nlohmann::json oj;
    oj["name"] = oc.name;
    oj["passed"] = oc.passed;
    oj["detail"] = oc.detail;
    j["checks"].push_back(oj);
    all = all && oc.passed;
  }
  if (persist) write_json(out / "bench.json", j);
  return all ? 0 : 3;
}

}  // namespace mfc
