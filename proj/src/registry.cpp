#include "mfc/registry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mfc {

int edit_distance(const std::string& a, const std::string& b) {
  const std::size_t na = a.size(), nb = b.size();
  std::vector<int> row(nb + 1);
  for (std::size_t j = 0; j <= nb; ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= na; ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= nb; ++j) {
      const int sub = diag + (a[i - 1] != b[j - 1]);
      diag = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
    }
  }
  return row[nb];
}

std::string nearest_key(const std::string& key, const std::vector<std::string>& known) {
  std::string best;
  int best_d = std::numeric_limits<int>::max();
  for (const auto& k : known) {
    const int d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  // a hint further than half the key length away is noise
  if (best_d > static_cast<int>(std::max<std::size_t>(2, key.size() / 2))) return {};
  return best;
}

namespace {

/// Typed parameter access over one JSON block with defaults, collecting
/// the allowed key set so leftovers can be rejected with a hint.
class ParamReader {
 public:
  ParamReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object() && !j_.is_null())
      throw ConfigError(path_ + ": expected an object");
  }

  double num(const std::string& key, double def) {
    allowed_.push_back(key);
    double v = def;
    if (!j_.is_null() && j_.contains(key)) {
      if (!j_[key].is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
      v = j_[key].get<double>();
    }
    effective_[key] = v;
    return v;
  }

  std::optional<double> opt_num(const std::string& key) {
    allowed_.push_back(key);
    if (j_.is_null() || !j_.contains(key)) return std::nullopt;
    if (!j_[key].is_number()) throw ConfigError(path_ + "." + key + ": expected a number");
    const double v = j_[key].get<double>();
    effective_[key] = v;
    return v;
  }

  const nlohmann::json& effective() const { return effective_; }

  void finish() const {
    if (j_.is_null()) return;
    for (const auto& item : j_.items()) {
      if (std::find(allowed_.begin(), allowed_.end(), item.key()) == allowed_.end()) {
        std::string msg = path_ + ": unknown key \"" + item.key() + "\"";
        const std::string hint = nearest_key(item.key(), allowed_);
        if (!hint.empty()) msg += " (did you mean \"" + hint + "\"?)";
        throw ConfigError(msg);
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::vector<std::string> allowed_;
  nlohmann::json effective_ = nlohmann::json::object();
};

struct LqParams {
  double a, abar, bhat, sigma0, q, qbar, rho_u, T, x0_mean, x0_std;
  std::optional<double> u_min, u_max;
};

LqParams read_lq_core(ParamReader& p) {
  LqParams out;
  out.a = p.num("a", 0.0);
  out.abar = p.num("abar", 0.0);
  out.bhat = p.num("bhat", 1.0);
  out.sigma0 = p.num("sigma0", 1.0);
  out.q = p.num("q", 1.0);
  out.qbar = p.num("qbar", 0.0);
  out.rho_u = p.num("rho_u", 1.0);
  out.T = p.num("T", 1.0);
  out.x0_mean = p.num("x0_mean", 0.0);
  out.x0_std = p.num("x0_std", 0.0);
  out.u_min = p.opt_num("u_min");
  out.u_max = p.opt_num("u_max");
  if (out.rho_u <= 0) throw ConfigError("problem.params.rho_u: must be positive");
  if (out.T <= 0) throw ConfigError("problem.params.T: must be positive");
  if (out.sigma0 < 0) throw ConfigError("problem.params.sigma0: must be nonnegative");
  if (out.x0_std < 0) throw ConfigError("problem.params.x0_std: must be nonnegative");
  return out;
}

Vec scalar_vec(double v) {
  Vec out(1);
  out(0) = v;
  return out;
}

/// Scalar LQ base instance shared by the three families; tracking target
/// xbar shifts the state cost, g0/c0 switch the singular channel on.
ProblemSpec lq_base(const LqParams& lp, double xbar, double g0, double c0) {
  ProblemSpec s;
  s.T = lp.T;
  s.n = s.l = s.r = s.k = s.d = 1;

  const double a = lp.a, abar = lp.abar, bhat = lp.bhat, sigma0 = lp.sigma0;
  const double q = lp.q, qbar = lp.qbar, rho_u = lp.rho_u;

  s.b = [a, abar, bhat](double, const Vec& x, const MuStats& mu, const Vec& u) {
    return scalar_vec(a * x(0) + abar * mu.mean(0) + bhat * u(0));
  };
  s.sigma = [sigma0](double, const Vec&, const MuStats&, const Vec&) {
    return Mat::Constant(1, 1, sigma0);
  };
  s.f = [q, qbar, rho_u, xbar](double, const Vec& x, const MuStats& mu, const Vec& u) {
    const double dx = x(0) - xbar;
    return 0.5 * (q * dx * dx + qbar * mu.mean(0) * mu.mean(0) + rho_u * u(0) * u(0));
  };
  s.G = [g0](double) { return Mat::Constant(1, 1, g0); };
  s.c = [c0](double) { return scalar_vec(c0); };
  s.c_strict_lower = g0 != 0.0 ? c0 : 0.0;

  // Slack linear constraint, far from the operating range, keeps the
  // multiplier machinery live without affecting the optimum.
  s.phi = {[](double, const Vec& x, const MuStats&, const Vec&) { return x(0) + 100.0; }};
  s.linear_constraint = true;
  s.A = [](double) { return Mat::Constant(1, 1, 1.0); };
  s.B = [](double) { return Mat::Zero(1, 1); };
  s.C = [](double) { return scalar_vec(100.0); };
  s.phi_depends_on_u = false;

  if (lp.u_min || lp.u_max) {
    const double lo = lp.u_min.value_or(-std::numeric_limits<double>::infinity());
    const double hi = lp.u_max.value_or(std::numeric_limits<double>::infinity());
    if (lo > hi) throw ConfigError("problem.params.u_min: exceeds u_max");
    s.U = ControlSet::box(scalar_vec(lo), scalar_vec(hi));
  }

  const double m0 = lp.x0_mean, s0 = lp.x0_std;
  s.sample_initial = [m0, s0](std::mt19937_64& gen) {
    std::normal_distribution<double> dist(m0, s0 > 0 ? s0 : 1e-300);
    return scalar_vec(s0 > 0 ? dist(gen) : m0);
  };

  auto& dv = s.derivs;
  dv.b_jac_x = [a](double, const Vec&, const MuStats&, const Vec&) {
    return Mat::Constant(1, 1, a);
  };
  dv.b_jac_u = [bhat](double, const Vec&, const MuStats&, const Vec&) {
    return Mat::Constant(1, 1, bhat);
  };
  dv.b_dmean = [abar](double, const Vec&, const MuStats&, const Vec&) {
    return Mat::Constant(1, 1, abar);
  };
  dv.b_dm2 = [](double, const Vec&, const MuStats&, const Vec&) { return scalar_vec(0.0); };
  auto zero_mats = [](double, const Vec&, const MuStats&, const Vec&) {
    return std::vector<Mat>{Mat::Zero(1, 1)};
  };
  dv.sigma_jac_x = zero_mats;
  dv.sigma_jac_u = zero_mats;
  dv.sigma_dmean = zero_mats;
  dv.sigma_dm2 = [](double, const Vec&, const MuStats&, const Vec&) { return Mat::Zero(1, 1); };
  dv.f_grad_x = [q, xbar](double, const Vec& x, const MuStats&, const Vec&) {
    return scalar_vec(q * (x(0) - xbar));
  };
  dv.f_grad_u = [rho_u](double, const Vec&, const MuStats&, const Vec& u) {
    return scalar_vec(rho_u * u(0));
  };
  dv.f_dmean = [qbar](double, const Vec&, const MuStats& mu, const Vec&) {
    return scalar_vec(qbar * mu.mean(0));
  };
  dv.f_dm2 = [](double, const Vec&, const MuStats&, const Vec&) { return 0.0; };
  auto zero_vec = [](double, const Vec&, const MuStats&, const Vec&) { return scalar_vec(0.0); };
  auto one_vec = [](double, const Vec&, const MuStats&, const Vec&) { return scalar_vec(1.0); };
  auto zero_sc = [](double, const Vec&, const MuStats&, const Vec&) { return 0.0; };
  dv.phi_grad_x = {one_vec};
  dv.phi_grad_u = {zero_vec};
  dv.phi_dmean = {zero_vec};
  dv.phi_dm2 = {zero_sc};

  const ControlSet U = s.U;
  dv.uhat = [bhat, rho_u, U](double, const Vec&, const MuStats&, const Vec& y, const Mat&) {
    return U.project(scalar_vec(-bhat * y(0) / rho_u));
  };
  return s;
}

}  // namespace

FamilyInstance make_problem(const std::string& family, const nlohmann::json& params) {
  FamilyInstance inst;
  if (family == "lq") {
    ParamReader p(params, "problem.params");
    const LqParams lp = read_lq_core(p);
    p.finish();
    inst.effective_params = p.effective();
    inst.spec = lq_base(lp, 0.0, 0.0, 1.0);
    inst.spec.name = "lq";
    if (inst.spec.U.kind == ControlSet::Kind::All) {
      LQSpec lq;
      lq.a = lp.a;
      lq.abar = lp.abar;
      lq.bhat = lp.bhat;
      lq.sigma0 = lp.sigma0;
      lq.q = lp.q;
      lq.qbar = lp.qbar;
      lq.rho_u = lp.rho_u;
      lq.T = lp.T;
      lq.x0_mean = lp.x0_mean;
      lq.x0_std = lp.x0_std;
      inst.lq = lq;
    }
    return inst;
  }
  if (family == "lq_constrained") {
    ParamReader p(params, "problem.params");
    const LqParams lp = read_lq_core(p);
    const double pa = p.num("phi_a", 1.0);
    const double pb = p.num("phi_b", 0.0);
    const double pc = p.num("phi_c", 0.0);
    p.finish();
    inst.effective_params = p.effective();
    inst.spec = lq_base(lp, 0.0, 0.0, 1.0);
    inst.spec.name = "lq_constrained";
    inst.spec.phi = {[pa, pb, pc](double, const Vec& x, const MuStats& mu, const Vec&) {
      return pa * x(0) + pb * mu.mean(0) + pc;
    }};
    inst.spec.A = [pa](double) { return Mat::Constant(1, 1, pa); };
    inst.spec.B = [pb](double) { return Mat::Constant(1, 1, pb); };
    inst.spec.C = [pc](double) { return scalar_vec(pc); };
    auto& dv = inst.spec.derivs;
    dv.phi_grad_x = {[pa](double, const Vec&, const MuStats&, const Vec&) {
      return scalar_vec(pa);
    }};
    dv.phi_grad_u = {[](double, const Vec&, const MuStats&, const Vec&) {
      return scalar_vec(0.0);
    }};
    dv.phi_dmean = {[pb](double, const Vec&, const MuStats&, const Vec&) {
      return scalar_vec(pb);
    }};
    dv.phi_dm2 = {[](double, const Vec&, const MuStats&, const Vec&) { return 0.0; }};
    return inst;
  }
  if (family == "lq_singular") {
    ParamReader p(params, "problem.params");
    const LqParams lp = read_lq_core(p);
    const double xbar = p.num("xbar", 0.0);
    const double g0 = p.num("g0", 1.0);
    const double c0 = p.num("c0", 1.0);
    p.finish();
    inst.effective_params = p.effective();
    if (c0 < 0) throw ConfigError("problem.params.c0: must be nonnegative");
    inst.spec = lq_base(lp, xbar, g0, c0);
    inst.spec.name = "lq_singular";
    return inst;
  }
  std::string msg = "problem.family: unknown family \"" + family + "\"";
  const std::string hint = nearest_key(family, registered_families());
  if (!hint.empty()) msg += " (did you mean \"" + hint + "\"?)";
  throw ConfigError(msg);
}

std::vector<std::string> registered_families() {
  return {"lq", "lq_constrained", "lq_singular"};
}

}  // namespace mfc
