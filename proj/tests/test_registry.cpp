#include <doctest.h>

#include "mfc/registry.hpp"

using namespace mfc;

namespace {

MuStats stats1(double mean, double m2) {
  MuStats mu;
  mu.mean = Vec::Constant(1, mean);
  mu.m2 = m2;
  return mu;
}

Vec v1(double x) { return Vec::Constant(1, x); }

}  // namespace

TEST_CASE("lq drift hand value") {
  const FamilyInstance fi =
      make_problem("lq", {{"a", 0.5}, {"abar", 0.3}, {"bhat", 1.0}});
  // 0.5 * 1 + 0.3 * 2 + 1 * (-1) = 0.1
  const Vec b = fi.spec.eval_drift(0.0, v1(1.0), stats1(2.0, 4.0), v1(-1.0));
  CHECK(b(0) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("linear constraint hand value") {
  const FamilyInstance fi =
      make_problem("lq_constrained", {{"phi_a", 2.0}, {"phi_b", 1.0}, {"phi_c", -0.5}});
  // 2 * 0.25 + 1 * 0.5 - 0.5 = 0.5
  const double phi =
      fi.spec.eval_constraint(0, 0.0, v1(0.25), stats1(0.5, 0.25), v1(0.0));
  CHECK(phi == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fi.spec.linear_constraint);
}

TEST_CASE("registered families") {
  const auto fams = registered_families();
  for (const char* name : {"lq", "lq_constrained", "lq_singular"})
    CHECK(std::find(fams.begin(), fams.end(), name) != fams.end());
}

TEST_CASE("edit distance and nearest key") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(nearest_key("sigm0", {"sigma0", "x0_mean"}) == "sigma0");
  CHECK(nearest_key("zzzzzzzz", {"sigma0", "x0_mean"}).empty());
}

TEST_CASE("unknown family parameter is rejected with a hint") {
  CHECK_THROWS_WITH_AS(make_problem("lq", {{"sigma", 0.3}}),
                       doctest::Contains("sigma0"), ConfigError);
  CHECK_THROWS_AS(make_problem("no_such_family", nlohmann::json::object()), ConfigError);
}

TEST_CASE("parameter bounds are enforced") {
  CHECK_THROWS_WITH_AS(make_problem("lq", {{"rho_u", -1.0}}),
                       doctest::Contains("rho_u"), ConfigError);
  CHECK_THROWS_WITH_AS(make_problem("lq_singular", {{"c0", -0.1}}),
                       doctest::Contains("c0"), ConfigError);
}

TEST_CASE("effective params fill defaults") {
  const FamilyInstance fi = make_problem("lq", {{"q", 2.0}});
  CHECK(fi.effective_params.at("q").get<double>() == 2.0);
  CHECK(fi.effective_params.at("rho_u").get<double>() == 1.0);
  CHECK(fi.lq.has_value());
}

TEST_CASE("analytic derivatives match finite differences") {
  const FamilyInstance fi = make_problem(
      "lq_singular", {{"a", 0.3}, {"abar", 0.2}, {"q", 1.5}, {"qbar", 0.4},
                      {"rho_u", 0.7}, {"xbar", 1.0}, {"g0", 1.0}, {"c0", 0.2}});
  const DerivEngine de(fi.spec);
  const MuStats mu = stats1(0.4, 0.9);
  const Vec x = v1(0.8), u = v1(-0.3);
  const double t = 0.25;
  CHECK((de.b_jac_x(t, x, mu, u) - de.fd_b_jac_x(t, x, mu, u)).norm() <= 1e-6);
  CHECK((de.b_jac_u(t, x, mu, u) - de.fd_b_jac_u(t, x, mu, u)).norm() <= 1e-6);
  CHECK((de.f_grad_x(t, x, mu, u) - de.fd_f_grad_x(t, x, mu, u)).norm() <= 1e-6);
  CHECK((de.f_grad_u(t, x, mu, u) - de.fd_f_grad_u(t, x, mu, u)).norm() <= 1e-6);
}

TEST_CASE("assumption probes pass on the compiled families") {
  for (const char* fam : {"lq", "lq_constrained", "lq_singular"}) {
    const FamilyInstance fi = make_problem(fam, nlohmann::json::object());
    const ValidationReport rep = validate_spec(fi.spec, 100, 17);
    CHECK(rep.all_passed());
  }
}
