#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "morsefield/jet.hpp"
#include "morsefield/jet_matrix.hpp"
#include "morsefield/quadrature.hpp"

using namespace morsefield;

namespace {

Exponent ex(int a, int b) {
  Exponent e{};
  e[0] = static_cast<std::uint8_t>(a);
  e[1] = static_cast<std::uint8_t>(b);
  return e;
}

}  // namespace

TEST_CASE("mixed partials up to order four match symbolic values") {
  // exp(x) sin(y) + x^3 y / (1 + x^2) at (0.3, -0.2), differentiated with sympy.
  const Jet x = Jet::variable(2, 4, 0, 0.3);
  const Jet y = Jet::variable(2, 4, 1, -0.2);
  const Jet f = exp(x) * sin(y) + x * x * x * y / (1.0 + x * x);
  struct Case {
    int a, b;
    double expected;
  };
  const Case cases[] = {
      {0, 0, -0.27312967440931082}, {1, 0, -0.31498978719442992}, {0, 1, 1.3477221443117073},
      {2, 0, -0.53782201720626749}, {1, 1, 1.5570227082373028},   {2, 2, 0.26817554596894384},
      {1, 3, -1.3229515021098725},  {4, 0, 3.5766001584262718},   {3, 1, 3.3126345499075836},
  };
  for (const auto& c : cases) {
    CAPTURE(c.a);
    CAPTURE(c.b);
    CHECK(f.partial(ex(c.a, c.b)) == doctest::Approx(c.expected).epsilon(1e-13));
  }
}

TEST_CASE("elementary functions invert each other") {
  const Jet x = Jet::variable(1, 4, 0, 0.7);
  const Jet a = log(exp(x));
  const Jet b = sqrt(x) * sqrt(x);
  const Jet c = pow(x, 2.5) / pow(x, 1.5);
  const Jet d = sin(x) * sin(x) + cos(x) * cos(x);
  const Jet e = reciprocal(reciprocal(x));
  for (int k = 0; k < x.size(); ++k) {
    const double expected = x.coeff(k);
    CHECK(a.coeff(k) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(b.coeff(k) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(c.coeff(k) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(e.coeff(k) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(d.coeff(k) == doctest::Approx(k == 0 ? 1.0 : 0.0).epsilon(1e-13));
  }
}

TEST_CASE("integer powers agree with repeated products") {
  const Jet x = Jet::variable(3, 3, 1, -0.4) + Jet::variable(3, 3, 0, 0.2);
  const Jet p = pow(x, 3);
  const Jet q = x * x * x;
  for (int k = 0; k < p.size(); ++k) CHECK(p.coeff(k) == doctest::Approx(q.coeff(k)));
  const Jet inv = pow(x, -2) * x * x;
  CHECK(inv.value() == doctest::Approx(1.0));
  for (int k = 1; k < inv.size(); ++k) CHECK(std::abs(inv.coeff(k)) < 1e-12);
}

TEST_CASE("derivative shifts one order down") {
  const Jet x = Jet::variable(2, 3, 0, 0.5);
  const Jet y = Jet::variable(2, 3, 1, 2.0);
  const Jet f = x * x * y;  // d/dx = 2xy
  const Jet df = f.derivative(0);
  CHECK(df.order() == 2);
  CHECK(df.value() == doctest::Approx(2.0));
  CHECK(df.partial(0) == doctest::Approx(4.0));  // 2y
  CHECK(df.partial(1) == doctest::Approx(1.0));  // 2x
  CHECK(df.partial(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("without_var restricts to the slice") {
  const Jet x = Jet::variable(2, 2, 0, 1.0);
  const Jet t = Jet::variable(2, 2, 1, 0.0);
  const Jet f = x * x + x * t + 3.0 * t;
  const Jet r = f.without_var(1);
  CHECK(r.partial(1) == 0.0);
  CHECK(r.partial(0, 1) == 0.0);
  CHECK(r.partial(0) == doctest::Approx(2.0));
}

TEST_CASE("jet matrix inverse carries derivatives") {
  const Jet s = Jet::variable(1, 2, 0, 0.3);
  JetMatrix m(2, 2, s);
  m(0, 0) = 1.0 + s;
  m(0, 1) = s * s;
  m(1, 0) = s * s;
  m(1, 1) = 2.0 - s;
  const JetMatrix prod = m * m.inverse();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const Jet& e = prod(i, j);
      CHECK(e.value() == doctest::Approx(i == j ? 1.0 : 0.0));
      CHECK(std::abs(e.partial(0)) < 1e-13);
      CHECK(std::abs(e.coeff(2)) < 1e-13);
    }
  }
}

TEST_CASE("time integral of a separable field") {
  // F = x^2 e^t, so Phi = x^2 (e^t - 1).
  const JetFunction F = [](std::span<const double> p, int order) {
    const auto v = coordinate_jets(p, order);
    return v[0] * v[0] * exp(v[1]);
  };
  const std::vector<double> p{0.4, 0.3};
  const Jet phi = time_integral_jet(F, p, 2);
  const double e = std::exp(0.3);
  CHECK(phi.value() == doctest::Approx(0.16 * (e - 1.0)).epsilon(1e-13));
  CHECK(phi.partial(0) == doctest::Approx(0.8 * (e - 1.0)).epsilon(1e-12));
  CHECK(phi.partial(1) == doctest::Approx(0.16 * e).epsilon(1e-12));
  CHECK(phi.partial(0, 1) == doctest::Approx(0.8 * e).epsilon(1e-12));
}
