#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "morsefield/fixtures.hpp"
#include "morsefield/morse.hpp"
#include "morsefield/verify.hpp"
#include "support/oracles.hpp"

using namespace morsefield;

namespace {

MetricPatch collar(const std::string& factor) {
  const auto vars = chart_variables(3);
  auto f = [&](const std::string& s) { return expression_field(parse(s, vars), 3); };
  std::vector<Field> packed{f("1 - 2*t*(" + factor + ")"), f("0"), f("0"), f("1 + 2*t*(" + factor + ")"), f("0"),
                            f("1")};
  return MetricPatch(ChartDomain{3, 0.5, 0.2}, SymmetricComponents(3, std::move(packed)), factor);
}

}  // namespace

TEST_CASE("Fixture B has a single nondegenerate minimum") {
  const MorseVerdict v = is_morse(fixtures::fixture_b());
  CHECK(v.is_morse);
  REQUIRE(v.census.points.size() == 1);
  const CriticalPointReport& p = v.census.points[0];
  CHECK(p.x.norm() < 1e-10);
  CHECK(p.index == 0);
  CHECK(p.classification == Classification::kNondegenerate);
  CHECK(p.hessian(0, 0) == doctest::Approx(8.0));
  CHECK(p.hessian(1, 1) == doctest::Approx(8.0));
  CHECK(std::abs(p.hessian(0, 1)) < 1e-10);
}

TEST_CASE("saddle and maximum are classified by index") {
  const Census saddle = find_critical_points(collar("1 + x1^2 - x2^2"));
  REQUIRE(saddle.points.size() == 1);
  CHECK(saddle.points[0].index == 1);
  CHECK(saddle.points[0].eigenvalues(0) == doctest::Approx(-8.0));
  CHECK(saddle.points[0].eigenvalues(1) == doctest::Approx(8.0));
  const Census max = find_critical_points(collar("1 - x1^2 - x2^2"));
  REQUIRE(max.points.size() == 1);
  CHECK(max.points[0].index == 2);
  CHECK(max.points[0].eigenvalues(0) == doctest::Approx(-8.0));
}

TEST_CASE("Hessian matches finite differences of the gradient") {
  const MetricPatch g = oracle::skew_metric();
  const std::vector<double> x{0.1, 0.15};
  const Eigen::MatrixXd h = hessian_sff_norm(g, x);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      auto gj = [&](const std::vector<double>& q) { return grad_sff_norm(g, q)(j); };
      CHECK(h(i, j) == doctest::Approx(oracle::partial(gj, x, i)).epsilon(1e-7));
    }
  }
}

TEST_CASE("Fixture C is degenerate and Fixture A is flat") {
  const MorseVerdict c = is_morse(fixtures::fixture_c());
  CHECK_FALSE(c.is_morse);
  CHECK_FALSE(c.census.points.empty());
  for (const auto& p : c.census.points) {
    CHECK(std::abs(p.x(0)) < 1e-2);
    CHECK(p.classification == Classification::kDegenerate);
  }
  const MorseVerdict a = is_morse(fixtures::fixture_a());
  CHECK_FALSE(a.is_morse);
  CHECK(a.census.flat);
  CHECK(a.census.points.empty());
}

TEST_CASE("the census does not depend on seed order") {
  const MetricPatch g = collar("1 + x1^2 - x2^2 + x1^3/2");
  CensusOptions o;
  auto seeds = census_seeds(2, 0.5, 6);
  const Census forward = find_critical_points_from(g, seeds, o);
  std::reverse(seeds.begin(), seeds.end());
  const Census backward = find_critical_points_from(g, seeds, o);
  REQUIRE(forward.points.size() == backward.points.size());
  for (std::size_t i = 0; i < forward.points.size(); ++i) {
    CHECK((forward.points[i].x - backward.points[i].x).norm() < 1e-12);
  }
}

TEST_CASE("a nondegenerate minimum persists under small perturbations") {
  const MetricPatch b = fixtures::fixture_b();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const SymTensorField k = random_tangential_tensor(3, seed);
    const ContinuationReport r = continuation_experiment(b, k, 1e-3, 4);
    CHECK(r.persisted_to_max);
    CHECK(r.largest_preserved_tau == doctest::Approx(1e-3));
    CHECK(r.max_drift <= 1e-2);
    for (const auto& s : r.steps) CHECK(s.count == 1);
  }
}
