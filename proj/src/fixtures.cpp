#include "morsefield/fixtures.hpp"

#include <map>
#include <random>
#include <stdexcept>

#include "morsefield/expr.hpp"

namespace morsefield::fixtures {

namespace {

using Components = std::map<std::pair<int, int>, std::string>;

// Components are 1-based like the patch files; missing entries are 0 off the
// diagonal and 1 on it.
MetricPatch from_strings(int n, double R, double T, const Components& c, const std::string& name) {
  const auto vars = chart_variables(n);
  std::vector<Field> packed(packed_size(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      auto it = c.find({i + 1, j + 1});
      const std::string text = it != c.end() ? it->second : (i == j ? "1" : "0");
      packed[packed_index(n, i, j)] = expression_field(parse(text, vars), n);
    }
  }
  return MetricPatch(ChartDomain{n, R, T}, SymmetricComponents(n, std::move(packed)), name);
}

Expression var(int i, int n) { return Expression::variable(i, chart_variables(n)[i]); }
Expression num(double v) { return Expression::constant(v); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

 private:
  std::mt19937_64 gen_;
};

/// Random quadratic form in the tangential variables, coefficients in [-s, s].
Expression random_quadratic(Rng& rng, int n, double s) {
  Expression q = num(0.0);
  for (int a = 0; a < n - 1; ++a) {
    for (int b = a; b < n - 1; ++b) q = q + num(rng.uniform(-s, s)) * var(a, n) * var(b, n);
  }
  return q;
}

Expression random_affine(Rng& rng, int nvars, int n, double c0, double s) {
  Expression e = num(c0);
  for (int a = 0; a < nvars; ++a) e = e + num(rng.uniform(-s, s)) * var(a, n);
  return e;
}

}  // namespace

MetricPatch fixture_a(double R, double T) {
  return from_strings(3, R, T, {{{1, 1}, "1 - 2*t"}, {{2, 2}, "1 + 2*t"}}, "A");
}

MetricPatch fixture_b(double R, double T) {
  return from_strings(3, R, T,
                      {{{1, 1}, "1 - 2*t*(1 + x1^2 + x2^2)"}, {{2, 2}, "1 + 2*t*(1 + x1^2 + x2^2)"}}, "B");
}

MetricPatch fixture_c(double R, double T) {
  return from_strings(3, R, T, {{{1, 1}, "1 - 2*t*(1 + x1^4)"}, {{2, 2}, "1 + 2*t*(1 + x1^4)"}}, "C");
}

MetricPatch flat_half_space(int n, double R, double T) { return from_strings(n, R, T, {}, "flat"); }

MetricPatch sphere_like(double R, double T) {
  return from_strings(3, R, T, {{{1, 1}, "(1 - t)^2"}, {{2, 2}, "(1 - t)^2"}}, "sphere");
}

MetricPatch sheared_flat(double R, double T) {
  return from_strings(3, R, T, {{{1, 3}, "-0.3"}, {{3, 3}, "1.09"}}, "sheared");
}

MetricPatch sheared_fixture_a(double R, double T) {
  return from_strings(3, R, T,
                      {{{1, 1}, "1 - 2*t"},
                       {{2, 2}, "1 + 2*t"},
                       {{1, 3}, "-0.3*(1 - 2*t)"},
                       {{3, 3}, "1 + 0.09*(1 - 2*t)"}},
                      "sheared_A");
}

MetricPatch skewed_half_disk(double R, double T) {
  return from_strings(2, R, T,
                      {{{1, 1}, "(1 + 0.2*x1)^2 + (0.2*t)^2"},
                       {{1, 2}, "(1 + 0.2*x1)*(0.3 + 0.2*t)"},
                       {{2, 2}, "0.09 + (1 + 0.2*x1)^2"}},
                      "skewed");
}

MetricPatch random_minimal(std::uint64_t seed, double R, double T) {
  constexpr int n = 3;
  Rng rng(seed);
  const Expression t = var(2, n);
  const Expression g11 = num(1.0) + random_quadratic(rng, n, 0.3);
  const Expression g12 = random_quadratic(rng, n, 0.3);
  const Expression g22 = num(1.0) + random_quadratic(rng, n, 0.3);
  // h0 nonzero at the center keeps the patch nowhere umbilic on a small ball.
  const double a0 = rng.uniform(0.5, 1.0) * (rng.uniform(0, 1) < 0.5 ? -1.0 : 1.0);
  const double b0 = rng.uniform(-1.0, 1.0);
  const Expression a = random_affine(rng, 2, n, a0, 0.4);
  const Expression b = random_affine(rng, 2, n, b0, 0.4);
  const Expression c = -(g22 * a - num(2.0) * g12 * b) / g11;
  const Expression tt = t * t;
  std::vector<Field> packed(packed_size(n));
  packed[packed_index(n, 0, 0)] = expression_field(g11 - num(2.0) * t * a + num(rng.uniform(-0.5, 0.5)) * tt, n);
  packed[packed_index(n, 0, 1)] = expression_field(g12 - num(2.0) * t * b + num(rng.uniform(-0.5, 0.5)) * tt, n);
  packed[packed_index(n, 1, 1)] = expression_field(g22 - num(2.0) * t * c + num(rng.uniform(-0.5, 0.5)) * tt, n);
  packed[packed_index(n, 0, 2)] = constant_field(0.0, n);
  packed[packed_index(n, 1, 2)] = constant_field(0.0, n);
  packed[packed_index(n, 2, 2)] = constant_field(1.0, n);
  return MetricPatch(ChartDomain{n, R, T}, SymmetricComponents(n, std::move(packed)),
                     "random_minimal_" + std::to_string(seed));
}

MetricPatch random_normal_gauge(std::uint64_t seed, int n, double R, double T) {
  Rng rng(seed);
  const Expression t = var(n - 1, n);
  std::vector<Field> packed(packed_size(n));
  for (int i = 0; i < n - 1; ++i) {
    for (int j = i; j < n - 1; ++j) {
      Expression e = (i == j ? num(1.0) : num(0.0)) + random_quadratic(rng, n, 0.2);
      e = e + t * random_affine(rng, n - 1, n, rng.uniform(-1.0, 1.0), 0.5);
      e = e + num(rng.uniform(-0.5, 0.5)) * t * t;
      if (i == j) e = e + num(0.1 * rng.uniform(-1.0, 1.0)) * sin(var(0, n) + t);
      packed[packed_index(n, i, j)] = expression_field(e, n);
    }
    packed[packed_index(n, i, n - 1)] = constant_field(0.0, n);
  }
  packed[packed_index(n, n - 1, n - 1)] = constant_field(1.0, n);
  return MetricPatch(ChartDomain{n, R, T}, SymmetricComponents(n, std::move(packed)),
                     "random_normal_gauge_" + std::to_string(seed));
}

MetricPatch random_general_chart(std::uint64_t seed, int n, double R, double T) {
  Rng rng(seed);
  std::vector<Field> packed(packed_size(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Expression e = (i == j ? num(1.0) : num(0.0)) + random_affine(rng, n, n, rng.uniform(-0.1, 0.1), 0.15);
      for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) e = e + num(rng.uniform(-0.1, 0.1)) * var(a, n) * var(b, n);
      }
      packed[packed_index(n, i, j)] = expression_field(e, n);
    }
  }
  return MetricPatch(ChartDomain{n, R, T}, SymmetricComponents(n, std::move(packed)),
                     "random_general_" + std::to_string(seed));
}

MetricPatch by_name(const std::string& name) {
  if (name == "A") return fixture_a();
  if (name == "B") return fixture_b();
  if (name == "C") return fixture_c();
  if (name == "flat") return flat_half_space();
  if (name == "sphere") return sphere_like();
  if (name == "sheared") return sheared_flat();
  if (name == "sheared_A") return sheared_fixture_a();
  if (name == "skewed") return skewed_half_disk();
  throw std::invalid_argument("unknown fixture '" + name + "'");
}

std::vector<std::string> names() { return {"A", "B", "C", "flat", "sphere", "sheared", "sheared_A", "skewed"}; }

}  // namespace morsefield::fixtures
