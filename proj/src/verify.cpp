#include "morsefield/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "morsefield/error.hpp"
#include "morsefield/perturb.hpp"

namespace morsefield {

namespace {

double uniform_pm1(std::mt19937_64& gen) { return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0; }

Expression var(int i, int n) { return Expression::variable(i, chart_variables(n)[i]); }

Expression random_poly(std::mt19937_64& gen, int n, int nvars) {
  Expression e = Expression::constant(uniform_pm1(gen));
  for (int a = 0; a < nvars; ++a) e = e + Expression::constant(uniform_pm1(gen)) * var(a, n);
  for (int a = 0; a < nvars; ++a) {
    for (int b = a; b < nvars; ++b) e = e + Expression::constant(uniform_pm1(gen)) * var(a, n) * var(b, n);
  }
  return e;
}

std::vector<std::vector<double>> interior_points(const MetricPatch& g, int per_axis) {
  std::vector<std::vector<double>> out;
  for (const auto& x : boundary_grid(g.d(), 0.8 * g.R(), std::max(per_axis / 2, 3))) {
    for (const double f : {0.25, 0.5, 0.75}) {
      std::vector<double> p = x;
      p.push_back(f * g.T());
      out.push_back(std::move(p));
    }
  }
  return out;
}

CheckResult symmetry_check(const MetricPatch& g, const std::vector<MirrorPair>& mirrors) {
  CheckResult c{"symmetry", 0.0, 1e-12, false, {}};
  for (const auto& m : mirrors) {
    const double r = mirror_mismatch(m, g.domain());
    if (r > c.residual) {
      c.residual = r;
      c.note = "g." + std::to_string(m.i + 1) + "." + std::to_string(m.j + 1) + " (line " +
               std::to_string(m.upper_line) + ") differs from g." + std::to_string(m.j + 1) + "." +
               std::to_string(m.i + 1) + " (line " + std::to_string(m.lower_line) + ")";
    }
  }
  return c;
}

CheckResult esc_check(const MetricPatch& g, int per_axis) {
  CheckResult c{"sff-routes", 0.0, 1e-6, false, {}};
  if (!g.normal_gauge()) {
    c.skipped = true;
    c.note = "patch is not in normal gauge";
    return c;
  }
  std::vector<double> a, b;
  for (const auto& x : boundary_grid(g.d(), g.R(), per_axis)) {
    for (const double t : {0.0, 0.5 * g.T()}) {
      const Eigen::MatrixXd he = second_fundamental_form(g, x, t, SffRoute::kNormalGauge).h;
      const Eigen::MatrixXd hg = second_fundamental_form(g, x, t, SffRoute::kGeneral).h;
      for (Eigen::Index k = 0; k < he.size(); ++k) {
        a.push_back(he.data()[k]);
        b.push_back(hg.data()[k]);
      }
    }
  }
  c.residual = relative_sup_error(a, b);
  return c;
}

CheckResult dif_check(const MetricPatch& g, int per_axis) {
  CheckResult c{"inverse-derivative", 0.0, 1e-8, false, {}};
  const double h = 1e-3 * std::min(1.0, g.T());
  for (const auto& p : interior_points(g, per_axis)) {
    for (int s = 0; s < g.n(); ++s) {
      auto central = [&](double step) {
        std::vector<double> lo = p, hi = p;
        lo[s] -= step;
        hi[s] += step;
        return Eigen::MatrixXd((inverse_metric(g, hi) - inverse_metric(g, lo)) / (2.0 * step));
      };
      const Eigen::MatrixXd fd = (4.0 * central(h / 2) - central(h)) / 3.0;
      c.residual = std::max(c.residual, (derivative_of_inverse(g, p, s) - fd).cwiseAbs().maxCoeff());
    }
  }
  return c;
}

CheckResult expansion_check(const MetricPatch& g, const SymTensorField& k, int per_axis) {
  CheckResult c{"neumann-expansion", 0.0, 1e-8, false, {}};
  const double tau = 1e-3;
  for (const auto& p : interior_points(g, per_axis)) {
    const Eigen::MatrixXd g0 = g.metric(p);
    const Eigen::MatrixXd kp = k.values(p);
    const NeumannResult nr = neumann_inverse(g0, kp, tau, 3);
    const Eigen::MatrixXd exact = checked_inverse(g0 + tau * kp);
    c.residual = std::max(c.residual, (nr.inverse - exact).cwiseAbs().maxCoeff());
  }
  return c;
}

CheckResult cond_check(const MetricPatch& g, const SymTensorField& k, int per_axis) {
  CheckResult c{"linearized-mean-curvature", 0.0, 1e-5, false, {}};
  if (!g.normal_gauge()) {
    c.skipped = true;
    c.note = "patch is not in normal gauge";
    return c;
  }
  std::vector<double> a, b;
  for (const auto& x : boundary_grid(g.d(), g.R(), per_axis)) {
    a.push_back(linearized_mean_curvature(g, k, x));
    b.push_back(linearized_mean_curvature_oracle(g, k, x));
  }
  c.residual = relative_sup_error(a, b);
  return c;
}

CheckResult conformal_check(const MetricPatch& g, const ConformalFactor& u, int per_axis) {
  CheckResult c{"conformal-norm-law", 0.0, 1e-8, false, {}};
  c.residual = verify_conformal_norm_law(g, u, per_axis);
  return c;
}

std::vector<CheckResult> simpl_checks(const MetricPatch& g) {
  CheckResult closed{"gradient-variation", 0.0, 1e-4, false, {}};
  CheckResult target{"gradient-variation-target", 0.0, 1e-3, false, {}};
  std::string why;
  if (!g.normal_gauge()) {
    why = "patch is not in normal gauge";
  } else {
    const MinimalityReport m = minimality_report(g, 1e-8, 17);
    if (!m.is_minimal) why = "patch is not minimal";
    else if (!m.nowhere_umbilic) why = "patch has an umbilic point";
  }
  if (!why.empty()) {
    closed.skipped = target.skipped = true;
    closed.note = target.note = why;
    return {closed, target};
  }
  const std::vector<double> p0(g.d(), 0.0);
  try {
    for (int r = 0; r < g.d(); ++r) {
      const PerturbationPlan plan = build_tangent_perturbation(g, p0, r);
      const DirectionalReport rep = evaluate_plan(g, plan);
      const Eigen::VectorXd form = rep.closed_form ? *rep.closed_form : rep.analytic;
      closed.residual = std::max(closed.residual, (form - rep.oracle).lpNorm<Eigen::Infinity>());
      const Eigen::VectorXd er = Eigen::VectorXd::Unit(g.d(), r);
      target.residual = std::max(target.residual, (rep.oracle - er).lpNorm<Eigen::Infinity>());
    }
  } catch (const Error& e) {
    closed.residual = target.residual = INFINITY;
    closed.note = target.note = e.what();
  }
  return {closed, target};
}

}  // namespace

double relative_sup_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    ref = std::max(ref, std::abs(b[i]));
  }
  return diff / std::max(ref, 1e-8);
}

SymTensorField random_tangential_tensor(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<Field> packed(packed_size(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const bool tangential = j < n - 1;
      packed[packed_index(n, i, j)] =
          tangential ? expression_field(random_poly(gen, n, n), n) : constant_field(0.0, n);
    }
  }
  return SymTensorField(SymmetricComponents(n, std::move(packed)));
}

ConformalFactor random_boundary_factor(int n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return ConformalFactor{expression_field(random_poly(gen, n, n - 1), n)};
}

std::vector<CheckResult> identity_suite(const MetricPatch& g, const std::vector<MirrorPair>& mirrors,
                                        const VerifyOptions& options) {
  const SymTensorField k = random_tangential_tensor(g.n(), options.seed);
  ConformalFactor u = random_boundary_factor(g.n(), options.seed + 1);
  if (!g.normal_gauge()) u = theta_lift(g, u.u);
  std::vector<CheckResult> out;
  out.push_back(symmetry_check(g, mirrors));
  out.push_back(esc_check(g, options.per_axis));
  out.push_back(dif_check(g, options.per_axis));
  out.push_back(expansion_check(g, k, options.per_axis));
  if (options.perturbation_checks) out.push_back(cond_check(g, k, options.per_axis));
  out.push_back(conformal_check(g, u, options.per_axis));
  if (options.perturbation_checks) {
    for (auto& c : simpl_checks(g)) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace morsefield
