#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "morsefield/error.hpp"
#include "morsefield/fixtures.hpp"
#include "morsefield/patch.hpp"
#include "support/oracles.hpp"

using namespace morsefield;

namespace {

Field f(const std::string& s, int n = 3) { return expression_field(parse(s, chart_variables(n)), n); }

MetricPatch diagonal(const std::string& g11, const std::string& g22, double R = 0.5, double T = 0.2) {
  std::vector<Field> packed{f(g11), f("0"), f("0"), f(g22), f("0"), f("1")};
  return MetricPatch(ChartDomain{3, R, T}, SymmetricComponents(3, std::move(packed)));
}

}  // namespace

TEST_CASE("validation rejects metrics that are not positive definite") {
  CHECK_THROWS_AS(diagonal("1 - 6*t", "1"), SpdViolationError);
  CHECK_THROWS_AS(diagonal("x1", "1"), SpdViolationError);
  CHECK_NOTHROW(diagonal("1 - 2*t", "1 + 2*t"));
}

TEST_CASE("normal gauge is detected structurally") {
  CHECK(fixtures::fixture_a().normal_gauge());
  CHECK_FALSE(fixtures::sheared_flat().normal_gauge());
  CHECK_FALSE(fixtures::skewed_half_disk().normal_gauge());
}

TEST_CASE("Christoffel symbols of the skew chart") {
  // sympy at (0.2, -0.1, 0.05)
  const double expected[3][3][3] = {
      {{0.0049534454296969886, -0.0098461307017625064, 0.019486449426182992},
       {-0.0098461307017625064, 0.0042440415198612419, 0.051138252457091526},
       {0.019486449426182992, 0.051138252457091526, -0.059667954135438161}},
      {{0.010146857637881072, -0.0056197504357562645, 0.052355227493574998},
       {-0.0056197504357562645, 0.013975368374685592, -0.25723055635956796},
       {0.052355227493574998, -0.25723055635956796, -0.030528077000533821}},
      {{-0.0095200270877424735, -0.048116076976712360, 0.096657544035291890},
       {-0.048116076976712360, 0.33667475685287322, -0.0027572163324803256},
       {0.096657544035291890, -0.0027572163324803256, -0.00020080857642775216}}};
  const auto gamma = christoffel(oracle::skew_metric(), std::vector<double>{0.2, -0.1, 0.05});
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) CHECK(gamma[k](i, j) == doctest::Approx(expected[k][i][j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("derivative of the inverse metric") {
  // sympy d/dx1 of g^{-1} at (0.2, -0.1, 0.05)
  const double expected[9] = {-0.0099020760128394480, -0.00010353023456693941, -0.0091899817639371284,
                              -0.00010353023456693941, 0.010543853646268259,   -0.0018864845459940590,
                              -0.0091899817639371284,  -0.0018864845459940590, -0.18491599000359974};
  const MetricPatch g = oracle::skew_metric();
  const std::vector<double> p{0.2, -0.1, 0.05};
  const Eigen::MatrixXd d = derivative_of_inverse(g, p, 0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(std::abs(d(i, j) - expected[3 * i + j]) < 1e-14);
  }
  for (int s = 0; s < 3; ++s) {
    Eigen::MatrixXd fd(3, 3);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        fd(i, j) = oracle::partial([&](const std::vector<double>& q) { return inverse_metric(g, q)(i, j); }, p, s);
      }
    }
    CHECK(oracle::max_abs_diff(derivative_of_inverse(g, p, s), fd) < 1e-9);
  }
}

TEST_CASE("Neumann expansion converges at fourth order in tau") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(3, 3, [&]() { return u(gen); });
    const Eigen::MatrixXd g0 = a * a.transpose() + Eigen::MatrixXd::Identity(3, 3);
    Eigen::MatrixXd k = Eigen::MatrixXd::NullaryExpr(3, 3, [&]() { return u(gen); });
    k = 0.5 * (k + k.transpose());
    const double tau = 1e-3;
    const NeumannResult r = neumann_inverse(g0, k, tau, 3);
    CHECK_FALSE(r.divergent);
    CHECK(oracle::max_abs_diff(r.inverse, (g0 + tau * k).inverse()) < 1e-8);
    const double e1 = oracle::max_abs_diff(neumann_inverse(g0, k, 2e-3, 3).inverse, (g0 + 2e-3 * k).inverse());
    const double e2 = oracle::max_abs_diff(neumann_inverse(g0, k, 4e-3, 3).inverse, (g0 + 4e-3 * k).inverse());
    CHECK(e2 / e1 == doctest::Approx(16.0).epsilon(0.1));
  }
  const Eigen::MatrixXd g0 = Eigen::MatrixXd::Identity(2, 2);
  CHECK(neumann_inverse(g0, 3.0 * g0, 1.0, 3).divergent);
}

TEST_CASE("checked inverse rejects singular input") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(checked_inverse(m), SingularMatrixError);
}

TEST_CASE("C^m norm sums sampled suprema of all partials") {
  const std::vector<Field> packed{f("t"), f("0"), f("0"), f("0"), f("0"), f("0")};
  const SymTensorField k(SymmetricComponents(3, packed));
  // sup |t| = T and sup |d_t t| = 1, everything else vanishes.
  CHECK(cm_norm(k, ChartDomain{3, 0.5, 0.2}, 2).value == doctest::Approx(1.2));
  const std::vector<Field> quad{f("x1^2"), f("0"), f("0"), f("0"), f("0"), f("0")};
  // sup x1^2 = R^2, sup |2 x1| = 2R, d_x1^2 = 2
  CHECK(cm_norm(SymTensorField(SymmetricComponents(3, quad)), ChartDomain{3, 0.5, 0.2}, 2).value ==
        doctest::Approx(0.25 + 1.0 + 2.0));
}

TEST_CASE("perturbed patches add componentwise") {
  const MetricPatch a = fixtures::fixture_a();
  const std::vector<Field> packed{f("x1"), f("t"), f("0"), f("x2"), f("0"), f("0")};
  const MetricPatch b = perturbed(a, SymTensorField(SymmetricComponents(3, packed)), 0.1);
  const std::vector<double> p{0.2, 0.3, 0.1};
  const Eigen::MatrixXd d = b.metric(p) - a.metric(p);
  CHECK(d(0, 0) == doctest::Approx(0.02));
  CHECK(d(0, 1) == doctest::Approx(0.01));
  CHECK(d(1, 1) == doctest::Approx(0.03));
  CHECK(d(2, 2) == doctest::Approx(0.0));
  CHECK(b.normal_gauge());
}
