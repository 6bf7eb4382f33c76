#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "morsefield/curvature.hpp"
#include "morsefield/error.hpp"
#include "morsefield/fixtures.hpp"
#include "morsefield/morse.hpp"
#include "support/oracles.hpp"

using namespace morsefield;

namespace {

MetricPatch normal_gauge_sample() {
  const auto vars = chart_variables(3);
  auto f = [&](const char* s) { return expression_field(parse(s, vars), 3); };
  std::vector<Field> packed{f("1 + x1*x2/5 - t*(1/2 + x1/3) + t^2/4"),
                            f("x2/10 + t*x1/5"),
                            f("0"),
                            f("1 + x2^2/10 + t*(1 + x2/2) - t^2/5 + sin(x1 + t)/10"),
                            f("0"),
                            f("1")};
  return MetricPatch(ChartDomain{3, 0.5, 0.2}, SymmetricComponents(3, std::move(packed)), "sample");
}

}  // namespace

TEST_CASE("second fundamental form of the skew chart") {
  // sympy at x = (0.2, -0.1), t = 0
  const MetricPatch g = oracle::skew_metric();
  const std::vector<double> x{0.2, -0.1};
  const Eigen::MatrixXd h = second_fundamental_form(g, x, 0.0).h;
  CHECK(h(0, 0) == doctest::Approx(-0.019514299027328435).epsilon(1e-12));
  CHECK(h(0, 1) == doctest::Approx(-0.0490805254992475).epsilon(1e-12));
  CHECK(h(1, 0) == doctest::Approx(-0.0490805254992475).epsilon(1e-12));
  CHECK(h(1, 1) == doctest::Approx(0.34331803021896049).epsilon(1e-12));
  CHECK(mean_curvature(g, x, 0.0) == doctest::Approx(0.32451123808046230).epsilon(1e-12));
  CHECK(sff_norm_sq(g, x, 0.0) == doctest::Approx(0.12354283277312227).epsilon(1e-12));
  CHECK(oracle::max_abs_diff(h, oracle::sff(g, x, 0.0)) < 1e-8);
  CHECK_THROWS_AS(second_fundamental_form(g, x, 0.0, SffRoute::kNormalGauge), GaugeError);
}

TEST_CASE("normal-gauge sample: curvature and its derivatives") {
  // sympy at x = (0.1, -0.2)
  const MetricPatch g = normal_gauge_sample();
  REQUIRE(g.normal_gauge());
  const std::vector<double> x{0.1, -0.2};
  CHECK(mean_curvature(g, x, 0.0) == doctest::Approx(-0.22560620720300528).epsilon(1e-12));
  CHECK(sff_norm_sq(g, x, 0.0) == doctest::Approx(0.31511431000287100).epsilon(1e-12));
  const Eigen::VectorXd grad = grad_sff_norm(g, x);
  CHECK(grad(0) == doctest::Approx(0.048348990242531613).epsilon(1e-11));
  CHECK(grad(1) == doctest::Approx(0.25734900897749141).epsilon(1e-11));
  const Eigen::MatrixXd hess = hessian_sff_norm(g, x);
  CHECK(hess(0, 0) == doctest::Approx(0.078865647272740662).epsilon(1e-10));
  CHECK(hess(0, 1) == doctest::Approx(-0.094495622203309786).epsilon(1e-10));
  CHECK(hess(1, 0) == doctest::Approx(-0.094495622203309786).epsilon(1e-10));
  CHECK(hess(1, 1) == doctest::Approx(0.068480816155827350).epsilon(1e-10));
  for (double t : {0.0, 0.1}) {
    const Eigen::MatrixXd a = second_fundamental_form(g, x, t, SffRoute::kNormalGauge).h;
    const Eigen::MatrixXd b = second_fundamental_form(g, x, t, SffRoute::kGeneral).h;
    CHECK(oracle::max_abs_diff(a, b) < 1e-13);
  }
}

TEST_CASE("curvature jets agree with finite differences") {
  const MetricPatch g = oracle::skew_metric();
  const std::vector<double> x{0.15, 0.05};
  const Jet H = mean_curvature_jet(g, x, 0.0, 1);
  const Jet S = sff_norm_sq_jet(g, x, 0.0, 1);
  for (int s = 0; s < 2; ++s) {
    auto fH = [&](const std::vector<double>& q) { return mean_curvature(g, q, 0.0); };
    auto fS = [&](const std::vector<double>& q) { return sff_norm_sq(g, q, 0.0); };
    CHECK(H.partial(s) == doctest::Approx(oracle::partial(fH, x, s)).epsilon(1e-8));
    CHECK(S.partial(s) == doctest::Approx(oracle::partial(fS, x, s)).epsilon(1e-8));
  }
}

TEST_CASE("fixture curvatures") {
  const std::vector<double> x{0.2, -0.3};
  const Eigen::MatrixXd ha = second_fundamental_form(fixtures::fixture_a(), x, 0.0).h;
  CHECK(ha(0, 0) == doctest::Approx(1.0));
  CHECK(ha(1, 1) == doctest::Approx(-1.0));
  CHECK(ha(0, 1) == doctest::Approx(0.0));
  const Eigen::MatrixXd hs = second_fundamental_form(fixtures::sheared_fixture_a(), x, 0.0).h;
  CHECK(oracle::max_abs_diff(hs, ha) < 1e-12);
  const double r2 = 0.13;
  CHECK(sff_norm_sq(fixtures::fixture_b(), x, 0.0) == doctest::Approx(2 * (1 + r2) * (1 + r2)));
  CHECK(mean_curvature(fixtures::sphere_like(), x, 0.0) == doctest::Approx(2.0));
  CHECK(sff_norm_sq(fixtures::sphere_like(), x, 0.0) == doctest::Approx(2.0));
  const std::vector<double> s{0.3};
  CHECK(std::abs(mean_curvature(fixtures::skewed_half_disk(), s, 0.0)) < 1e-12);
}

TEST_CASE("minimality report") {
  const MinimalityReport a = minimality_report(fixtures::fixture_a(), 1e-8);
  CHECK(a.is_minimal);
  CHECK(a.nowhere_umbilic);
  CHECK(a.min_sff_norm_sq == doctest::Approx(2.0));
  CHECK(minimality_report(fixtures::fixture_b(), 1e-8).is_minimal);
  const MinimalityReport sphere = minimality_report(fixtures::sphere_like(), 1e-8);
  CHECK_FALSE(sphere.is_minimal);
  CHECK(sphere.max_abs_H == doctest::Approx(2.0));
  const MinimalityReport flat = minimality_report(fixtures::flat_half_space(), 1e-8);
  CHECK(flat.is_minimal);
  CHECK_FALSE(flat.nowhere_umbilic);
}

TEST_CASE("conformal change of the mean curvature") {
  const MetricPatch a = fixtures::fixture_a();
  const auto vars = chart_variables(3);
  const ConformalFactor u{expression_field(parse("0.3*x1 - 0.2*x2^2 + 0.5*t", vars), 3)};
  const MetricPatch ga = conformal_metric(a, u);
  for (const std::vector<double>& x : {std::vector<double>{0.1, 0.2}, std::vector<double>{-0.3, 0.0}}) {
    std::vector<double> p = x;
    p.push_back(0.0);
    const double expected = conformal_mean_curvature(0.0, u.u->value(p), u.normal_derivative(a, x), 2);
    CHECK(oracle::mean_curvature(ga, x) == doctest::Approx(expected).epsilon(1e-7));
    CHECK(mean_curvature(ga, x, 0.0) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(u.normal_derivative(a, std::vector<double>{0.0, 0.0}) == doctest::Approx(-0.5));
  CHECK_FALSE(u.in_theta(a));
  CHECK_THROWS_AS(verify_conformal_norm_law(a, u), ThetaViolationError);
}

TEST_CASE("conformal norm law on Theta") {
  const auto vars = chart_variables(3);
  const ConformalFactor u{expression_field(parse("0.3*x1 - 0.2*x2^2 + t^2", vars), 3)};
  CHECK(u.in_theta(fixtures::fixture_a()));
  CHECK(verify_conformal_norm_law(fixtures::fixture_a(), u) < 1e-12);
  CHECK(verify_conformal_norm_law(normal_gauge_sample(), u) < 1e-12);
  const MetricPatch ga = conformal_metric(fixtures::fixture_b(), u);
  const std::vector<double> x{0.2, 0.1};
  std::vector<double> p{0.2, 0.1, 0.0};
  const double e2u = std::exp(2 * u.u->value(p));
  CHECK(oracle::sff_norm_sq(ga, x) * e2u == doctest::Approx(sff_norm_sq(fixtures::fixture_b(), x, 0.0)).epsilon(1e-7));
}

TEST_CASE("Theta uses the unit normal of the chart") {
  const MetricPatch sheared = fixtures::sheared_fixture_a();
  const auto vars = chart_variables(3);
  const Field b = expression_field(parse("0.3*x1 - 0.2*x2^2", vars), 3);
  const ConformalFactor flat_in_t{b};
  // nu has a tangential part in the sheared chart, so a t-independent factor is not in Theta.
  CHECK_FALSE(flat_in_t.in_theta(sheared));
  const ConformalFactor lifted = theta_lift(sheared, b);
  CHECK(lifted.in_theta(sheared, 1e-12));
  CHECK(verify_conformal_norm_law(sheared, lifted) < 1e-10);
  CHECK_THROWS_AS(verify_conformal_norm_law(sheared, flat_in_t), ThetaViolationError);
  const ConformalFactor same = theta_lift(fixtures::fixture_a(), b);
  const std::vector<double> p{0.2, 0.1, 0.15};
  CHECK(same.u->value(p) == doctest::Approx(b->value(p)));
}
