#include "morsefield/perturb.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "morsefield/error.hpp"
#include "morsefield/quadrature.hpp"

namespace morsefield {

namespace {

using ExprMatrix = std::vector<std::vector<Expression>>;

std::vector<double> at_boundary(std::span<const double> x) {
  std::vector<double> p(x.begin(), x.end());
  p.push_back(0.0);
  return p;
}

Expression coord(int i, int n) { return Expression::variable(i, chart_variables(n)[i]); }
Expression num(double v) { return Expression::constant(v); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string pair_name(const char* stem, int i, int j) {
  return std::string(stem) + "_" + std::to_string(i + 1) + std::to_string(j + 1);
}

struct SliceValues {
  Eigen::MatrixXd h, gamma, ginv;
};

SliceValues slice_values(const MetricPatch& g, std::span<const double> x) {
  const SliceGeometry s = slice_geometry(g, x, 0.0, 0);
  return {s.h.values(), s.gamma.values(), s.gamma_inv.values()};
}

SliceGeometry slice_at(const MetricPatch& g, std::span<const double> p, int order) {
  const int d = g.d();
  return slice_geometry(g, p.first(d), p[d], order, SffRoute::kNormalGauge);
}

void require_gauge(const MetricPatch& g) {
  if (!g.normal_gauge()) throw GaugeError("tangent perturbations need a normal-gauge patch");
}

void require_point(const MetricPatch& g, std::span<const double> x) {
  if (static_cast<int>(x.size()) != g.d()) throw std::invalid_argument("boundary point has the wrong dimension");
}

/// 2 (G h G)_aa / G_aa along the collar, G the inverse slice metric.
Field integrating_factor(const MetricPatch& g, int a) {
  return function_field(g.n(), g.max_order() - 1, [g, a](std::span<const double> p, int order) {
    const SliceGeometry s = slice_at(g, p, order);
    const JetMatrix m = s.gamma_inv * s.h * s.gamma_inv;
    return 2.0 * m(a, a) / s.gamma_inv(a, a);
  });
}

Field time_integral(const Field& f) {
  return function_field(f->dim(), f->max_order(), [f](std::span<const double> p, int order) {
    return time_integral_jet([&f](std::span<const double> q, int o) { return f->jet(q, o); }, p, order);
  });
}

/// The field's restriction to t = 0, extended constantly in t.
Field boundary_only(const Field& f) {
  const int n = f->dim();
  if (const Expression* e = f->expression()) {
    return expression_field(e->substitute(n - 1, num(0.0)).folded(), n);
  }
  return function_field(n, f->max_order(), [f, n](std::span<const double> p, int order) {
    std::vector<double> q(p.begin(), p.end());
    q[n - 1] = 0.0;
    return f->jet(q, order).without_var(n - 1);
  });
}

ExprMatrix multiply(const ExprMatrix& a, const ExprMatrix& b) {
  const std::size_t d = a.size();
  ExprMatrix c(d, std::vector<Expression>(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Expression s = num(0.0);
      for (std::size_t k = 0; k < d; ++k) s = s + a[i][k] * b[k][j];
      c[i][j] = s;
    }
  }
  return c;
}

ExprMatrix symbolic_inverse(const ExprMatrix& a) {
  const std::size_t d = a.size();
  if (d == 1) return {{num(1.0) / a[0][0]}};
  if (d == 2) {
    const Expression det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    return {{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}};
  }
  if (d == 3) {
    ExprMatrix cof(3, std::vector<Expression>(3));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
        cof[i][j] = a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1];
      }
    }
    const Expression det = a[0][0] * cof[0][0] + a[0][1] * cof[0][1] + a[0][2] * cof[0][2];
    ExprMatrix inv(3, std::vector<Expression>(3));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) inv[i][j] = cof[j][i] / det;
    }
    return inv;
  }
  throw std::invalid_argument("symbolic inverse supports boundary dimension <= 3");
}

double uniform_pm1(std::mt19937_64& gen) { return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0; }

Eigen::VectorXd richardson(const std::function<Eigen::VectorXd(double)>& central, double step) {
  const Eigen::VectorXd d1 = central(step);
  const Eigen::VectorXd d2 = central(0.5 * step);
  return (4.0 * d2 - d1) / 3.0;
}

Eigen::VectorXd with_shrink(const std::function<Eigen::VectorXd(double)>& central, double step) {
  try {
    return richardson(central, step);
  } catch (const SpdViolationError&) {
    return richardson(central, step / 10.0);
  }
}

Expression shifted(int r, int n, std::span<const double> p0) { return coord(r, n) - num(p0[r]); }

std::vector<Expression> quadratic_forms(int n, std::span<const double> p0) {
  const int d = n - 1;
  std::vector<Expression> q;
  for (int r = 0; r < d; ++r) {
    for (int s = r; s < d; ++s) {
      q.push_back(r == s ? num(0.5) * pow(shifted(r, n, p0), 2) : shifted(r, n, p0) * shifted(s, n, p0));
    }
  }
  return q;
}

std::vector<double> center_of(const Census& c, int d) {
  std::vector<double> p0(d, 0.0);
  if (c.flat) return p0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pt : c.points) {
    if (pt.classification != Classification::kDegenerate) continue;
    if (pt.x.norm() < best) {
      best = pt.x.norm();
      p0.assign(pt.x.data(), pt.x.data() + d);
    }
  }
  return p0;
}

}  // namespace

double linearized_mean_curvature(const MetricPatch& g0, const SymTensorField& k, std::span<const double> x) {
  require_point(g0, x);
  const int n = g0.n(), d = g0.d();
  const SliceValues s = slice_values(g0, x);
  const auto jets = k.components().jets(at_boundary(x), 1);
  Eigen::MatrixXd K(d, d), Kt(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const Jet& c = jets[packed_index(n, i, j)];
      K(i, j) = c.value();
      Kt(i, j) = c.partial(n - 1);
    }
  }
  return -(s.ginv * K * s.ginv * s.h).trace() - 0.5 * (s.ginv * Kt).trace();
}

double linearized_mean_curvature_oracle(const MetricPatch& g0, const SymTensorField& k, std::span<const double> x,
                                        double step) {
  require_point(g0, x);
  const auto p = at_boundary(x);
  const double hp = mean_curvature(perturbed_at(g0, k, step, p), x, 0.0);
  const double hm = mean_curvature(perturbed_at(g0, k, -step, p), x, 0.0);
  return (hp - hm) / (2.0 * step);
}

double max_linearized_mean_curvature(const MetricPatch& g0, const SymTensorField& k, int per_axis) {
  double m = 0.0;
  for (const auto& x : boundary_grid(g0.d(), g0.R(), per_axis)) {
    m = std::max(m, std::abs(linearized_mean_curvature(g0, k, x)));
  }
  return m;
}

SymTensorField solve_mean_curvature_ode(const MetricPatch& g0, const Field& target, const Field& c) {
  require_gauge(g0);
  const int n = g0.n();
  if (target->dim() != n || c->dim() != n) throw std::invalid_argument("boundary data dimension mismatch");
  const Field phi = time_integral(integrating_factor(g0, 0));
  const Field weight = function_field(n, g0.max_order() - 1, [g0, phi](std::span<const double> p, int order) {
    const SliceGeometry s = slice_at(g0, p, order);
    return exp(phi->jet(p, order)) / s.gamma_inv(0, 0);
  });
  const Field psi = time_integral(weight);
  const Field k11 =
      product(exp_scaled(-1.0, phi), sum(boundary_only(c), scaled(-2.0, product(boundary_only(target), psi))));
  std::vector<Field> packed(packed_size(n), constant_field(0.0, n));
  packed[packed_index(n, 0, 0)] = k11;
  return SymTensorField(SymmetricComponents(n, std::move(packed)));
}

IndexSelection find_nondegenerate_indices(const Eigen::MatrixXd& h, double tol) {
  if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("h must be a nonempty square matrix");
  const Eigen::MatrixXd h2 = h * h.transpose();
  const int d = static_cast<int>(h.rows());
  auto value = [&](int i, int j) { return h2(i, j) - 2.0 * h(i, j) * h(i, j); };

  IndexSelection best;
  best.value = 0.0;
  for (int i = 0; i < d; ++i) {
    if (std::abs(value(i, i)) > std::abs(best.value)) best = {i, i, value(i, i)};
  }
  if (std::abs(best.value) > tol) return best;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      if (std::abs(value(i, j)) > std::abs(best.value)) best = {i, j, value(i, j)};
    }
  }
  if (std::abs(best.value) > tol) return best;
  throw NoIndicesError("every index pair has |sum_k h_ik h_jk - 2 h_ij^2| <= tol");
}

const char* to_string(PlanMode mode) {
  switch (mode) {
    case PlanMode::kTangentExplicit: return "tangent-explicit";
    case PlanMode::kTangentBasisSolve: return "tangent-basis-solve";
    case PlanMode::kConformal: return "conformal";
  }
  return "?";
}

SymTensorField trace_corrected(const MetricPatch& g0, const std::vector<Expression>& tangential_packed) {
  require_gauge(g0);
  const int n = g0.n(), d = g0.d(), t = n - 1;
  if (static_cast<int>(tangential_packed.size()) != packed_size(d)) {
    throw std::invalid_argument("tangential block has the wrong size");
  }
  ExprMatrix A(d, std::vector<Expression>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) A[i][j] = tangential_packed[packed_index(d, i, j)];
  }

  std::vector<Field> packed(packed_size(n), constant_field(0.0, n));
  if (g0.symbolic()) {
    ExprMatrix gamma(d, std::vector<Expression>(d)), h(d, std::vector<Expression>(d));
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const Expression& e = *g0.component(i, j)->expression();
        gamma[i][j] = e.substitute(t, num(0.0)).folded();
        h[i][j] = (num(-0.5) * e.derivative(t)).substitute(t, num(0.0)).folded();
      }
    }
    const ExprMatrix ginv = symbolic_inverse(gamma);
    const ExprMatrix P = multiply(multiply(ginv, A), ginv);
    Expression s = num(0.0);
    for (int k = 0; k < d; ++k) {
      for (int l = 0; l < d; ++l) s = s + P[k][l] * h[l][k];
    }
    const Expression coeff = (num(-2.0 / d) * s).folded();
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        packed[packed_index(n, i, j)] = expression_field((A[i][j] + coord(t, n) * coeff * gamma[i][j]).folded(), n);
      }
    }
    return SymTensorField(SymmetricComponents(n, std::move(packed)));
  }

  const Field coeff = function_field(n, g0.max_order() - 1, [g0, A, d, t](std::span<const double> p, int order) {
    std::vector<double> base(p.begin(), p.end());
    base[t] = 0.0;
    const SliceGeometry s = slice_at(g0, base, order);
    const auto x = coordinate_jets(base, order);
    JetMatrix a(d, d, x[0]);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) a(i, j) = A[i][j].evaluate(std::span<const Jet>(x));
    }
    const JetMatrix P = s.gamma_inv * a * s.gamma_inv;
    return (contract(P, s.h) * (-2.0 / d)).without_var(t);
  });
  const Field tf = expression_field(coord(t, n), n);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      packed[packed_index(n, i, j)] = sum(expression_field(A[i][j], n),
                                          product(tf, product(coeff, boundary_only(g0.component(i, j)))));
    }
  }
  return SymTensorField(SymmetricComponents(n, std::move(packed)));
}

PerturbationPlan build_tangent_perturbation(const MetricPatch& g0, std::span<const double> p0, int r,
                                            const TangentOptions& options) {
  require_gauge(g0);
  require_point(g0, p0);
  const int n = g0.n(), d = g0.d();
  if (r < 0 || r >= d) throw std::invalid_argument("target direction out of range");

  const SliceValues sv = slice_values(g0, p0);
  const Eigen::MatrixXd M = sv.ginv * sv.h * sv.ginv;
  const Eigen::MatrixXd W = M * sv.h * sv.ginv;
  if ((M * sv.h).trace() <= 1e-12) throw UmbilicPointError("second fundamental form vanishes at p0");

  PerturbationPlan plan;
  plan.r = r;
  plan.p0.assign(p0.begin(), p0.end());
  plan.indices = find_nondegenerate_indices(sv.h);

  int a = 0;
  double w = 0.0;
  for (int i = 0; i < d; ++i) {
    const double wi = W(i, i) - M(i, i) * M(i, i) / sv.ginv(i, i);
    if (std::abs(wi) > std::abs(w)) {
      w = wi;
      a = i;
    }
  }

  if (std::abs(w) > options.weight_tol) {
    plan.mode = PlanMode::kTangentExplicit;
    plan.active_component = a;
    plan.weight = w;
    const Expression c = (num(-1.0 / (2.0 * w)) * shifted(r, n, p0)).folded();
    plan.coefficient = expression_field(c, n);
    const Field f = integrating_factor(g0, a);
    const Field kaa = product(plan.coefficient, exp_scaled(-1.0, time_integral(f)));
    std::vector<Field> packed(packed_size(n), constant_field(0.0, n));
    packed[packed_index(n, a, a)] = kaa;
    plan.tensor = SymTensorField(SymmetricComponents(n, std::move(packed)));
    plan.coefficients.push_back(pair_name("c", a, a) + " = " + c.to_string());
    plan.integrating_factors.push_back(pair_name("f", a, a) + " = 2 (g^-1 h g^-1)_" + std::to_string(a + 1) +
                                       std::to_string(a + 1) + " / g^" + std::to_string(a + 1) +
                                       std::to_string(a + 1) + ", f(p0, 0) = " + fmt(f->value(at_boundary(p0))));
  } else {
    plan.mode = PlanMode::kTangentBasisSolve;
    int b = 0;
    for (int i = 1; i < d; ++i) {
      if (W(i, i) > W(b, b)) b = i;
    }
    std::vector<std::vector<Expression>> basis;
    for (int s = 0; s < d; ++s) {
      std::vector<Expression> A(packed_size(d), num(0.0));
      A[packed_index(d, b, b)] = shifted(s, n, p0);
      basis.push_back(A);
    }
    for (int s = 0; s < d; ++s) {
      std::vector<Expression> A(packed_size(d), num(0.0));
      for (int i = 0; i < d; ++i) A[packed_index(d, i, i)] = shifted(s, n, p0);
      basis.push_back(A);
    }
    Eigen::MatrixXd cols(d, static_cast<int>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) {
      cols.col(static_cast<int>(j)) = directional_derivative_of_gradient(g0, trace_corrected(g0, basis[j]), p0);
    }
    const Eigen::VectorXd er = Eigen::VectorXd::Unit(d, r);
    const Eigen::VectorXd alpha = cols.completeOrthogonalDecomposition().solve(er);
    plan.lsq_residual = (cols * alpha - er).lpNorm<Eigen::Infinity>();
    if (!(plan.lsq_residual <= options.residual_tol)) {
      throw RankError("basis least-squares residual " + fmt(plan.lsq_residual) + " exceeds tolerance");
    }
    plan.basis_weights.assign(alpha.data(), alpha.data() + alpha.size());

    std::vector<Expression> A(packed_size(d), num(0.0));
    for (std::size_t j = 0; j < basis.size(); ++j) {
      for (int q = 0; q < packed_size(d); ++q) A[q] = A[q] + num(alpha(static_cast<int>(j))) * basis[j][q];
    }
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        Expression e = A[packed_index(d, i, j)].folded();
        A[packed_index(d, i, j)] = e;
        if (!e.is_constant(0.0)) plan.coefficients.push_back(pair_name("A", i, j) + " = " + e.to_string());
      }
    }
    plan.tensor = trace_corrected(g0, A);
    plan.corrector = "k_ij = A_ij - t (2/" + std::to_string(d) + ") <A, h>_gamma gamma_ij, gamma and h at t = 0";
  }
  plan.max_linearized_H = max_linearized_mean_curvature(g0, *plan.tensor);
  return plan;
}

double ExplicitEndpoints::max_error() const {
  double e = std::max(std::abs(k00), std::abs(dt));
  e = std::max(e, (ds - expected_ds).lpNorm<Eigen::Infinity>());
  e = std::max(e, (dst - expected_dst).lpNorm<Eigen::Infinity>());
  return e;
}

ExplicitEndpoints explicit_endpoints(const MetricPatch& g0, const PerturbationPlan& plan) {
  if (plan.mode != PlanMode::kTangentExplicit) throw std::invalid_argument("endpoint conditions need an explicit plan");
  const int n = g0.n(), d = g0.d(), a = plan.active_component, t = n - 1;
  const auto p = at_boundary(plan.p0);
  const Jet k = plan.tensor->component(a, a)->jet(p, 2);
  const Jet c = plan.coefficient->jet(p, 1);
  const double f = integrating_factor(g0, a)->value(p);
  ExplicitEndpoints e;
  e.k00 = k.value();
  e.dt = k.partial(t);
  e.ds.resize(d);
  e.dst.resize(d);
  e.expected_ds.resize(d);
  e.expected_dst.resize(d);
  for (int s = 0; s < d; ++s) {
    e.ds(s) = k.partial(s);
    e.dst(s) = k.partial(s, t);
    e.expected_ds(s) = c.partial(s);
    e.expected_dst(s) = -f * c.partial(s);
  }
  return e;
}

Eigen::VectorXd directional_derivative_of_gradient(const MetricPatch& g0, const SymTensorField& k,
                                                   std::span<const double> p0, double step) {
  require_point(g0, p0);
  const auto p = at_boundary(p0);
  const auto central = [&](double tau) -> Eigen::VectorXd {
    const Eigen::VectorXd gp = grad_sff_norm(perturbed_at(g0, k, tau, p), p0);
    const Eigen::VectorXd gm = grad_sff_norm(perturbed_at(g0, k, -tau, p), p0);
    return (gp - gm) / (2.0 * tau);
  };
  return with_shrink(central, step);
}

Eigen::VectorXd analytic_gradient_variation(const MetricPatch& g0, const SymTensorField& k,
                                            std::span<const double> p0) {
  require_gauge(g0);
  require_point(g0, p0);
  const int n = g0.n(), d = g0.d(), t = n - 1;
  for (int i = 0; i < n; ++i) {
    if (!is_structurally_constant(k.component(i, t), 0.0)) {
      throw GaugeError("the analytic variation needs a perturbation without normal components");
    }
  }
  const auto p = at_boundary(p0);
  const auto gj = g0.metric_jets(p, 2);
  const auto kj = k.components().jets(p, 2);
  std::vector<Jet> g1, gd, k1, kd;
  for (std::size_t q = 0; q < gj.size(); ++q) {
    g1.push_back(gj[q].truncated(1));
    gd.push_back(gj[q].derivative(t));
    k1.push_back(kj[q].truncated(1));
    kd.push_back(kj[q].derivative(t));
  }
  const JetMatrix Gi = symmetric_from_packed(g1, n, d).inverse();
  const JetMatrix Gd = symmetric_from_packed(gd, n, d);
  const JetMatrix K = symmetric_from_packed(k1, n, d);
  const JetMatrix Kd = symmetric_from_packed(kd, n, d);
  const JetMatrix GiGd = Gi * Gd;
  const Jet dN = ((Gi * Kd * GiGd).trace() - (Gi * K * GiGd * GiGd).trace()) * 0.5;
  Eigen::VectorXd out(d);
  for (int s = 0; s < d; ++s) out(s) = dN.partial(s);
  return out;
}

Eigen::VectorXd explicit_closed_form(const MetricPatch& g0, const PerturbationPlan& plan) {
  if (plan.mode != PlanMode::kTangentExplicit) throw std::invalid_argument("closed form needs an explicit plan");
  const Jet c = plan.coefficient->jet(at_boundary(plan.p0), 1);
  Eigen::VectorXd out(g0.d());
  for (int s = 0; s < g0.d(); ++s) out(s) = -2.0 * c.partial(s) * plan.weight;
  return out;
}

DirectionalReport evaluate_plan(const MetricPatch& g0, const PerturbationPlan& plan) {
  DirectionalReport rep;
  if (plan.mode == PlanMode::kConformal) {
    rep.oracle = conformal_directional_derivative(g0, *plan.base, *plan.conformal, plan.p0);
    rep.analytic = conformal_closed_form(g0, *plan.base, *plan.conformal, plan.p0);
    rep.closed_form = rep.analytic;
    return rep;
  }
  rep.oracle = directional_derivative_of_gradient(g0, *plan.tensor, plan.p0);
  rep.analytic = analytic_gradient_variation(g0, *plan.tensor, plan.p0);
  if (plan.mode == PlanMode::kTangentExplicit) rep.closed_form = explicit_closed_form(g0, plan);
  return rep;
}

PerturbationPlan build_conformal_perturbation(const MetricPatch& g, const ConformalFactor& u0,
                                              std::span<const double> p0, int r, double umbilic_tol) {
  require_point(g, p0);
  const int n = g.n(), d = g.d();
  if (r < 0 || r >= d) throw std::invalid_argument("target direction out of range");
  if (!u0.in_theta(g)) throw ThetaViolationError("base conformal factor has nonzero normal derivative");
  const double N = sff_norm_sq(g, p0, 0.0);
  if (!(N > umbilic_tol)) throw UmbilicPointError("|II|^2 vanishes at p0");
  const double u00 = u0.u->value(at_boundary(p0));
  const Expression v = (num(-std::exp(2.0 * u00) / (2.0 * N)) * shifted(r, n, p0)).folded();

  PerturbationPlan plan;
  plan.mode = PlanMode::kConformal;
  plan.r = r;
  plan.p0.assign(p0.begin(), p0.end());
  plan.coefficient = expression_field(v, n);
  plan.coefficients.push_back("v = " + v.to_string());
  plan.conformal = ConformalFactor{plan.coefficient};
  plan.base = u0;
  return plan;
}

Eigen::VectorXd conformal_directional_derivative(const MetricPatch& g, const ConformalFactor& u0,
                                                 const ConformalFactor& v, std::span<const double> p0,
                                                 double step) {
  require_point(g, p0);
  const auto grad_at = [&](double tau) {
    return grad_sff_norm(conformal_metric(g, ConformalFactor{sum(u0.u, scaled(tau, v.u))}), p0);
  };
  const auto central = [&](double tau) -> Eigen::VectorXd {
    return (grad_at(tau) - grad_at(-tau)) / (2.0 * tau);
  };
  return with_shrink(central, step);
}

Eigen::VectorXd conformal_closed_form(const MetricPatch& g, const ConformalFactor& u0, const ConformalFactor& v,
                                      std::span<const double> p0) {
  require_point(g, p0);
  const auto p = at_boundary(p0);
  const double N = sff_norm_sq(g, p0, 0.0);
  const double scale = -2.0 * std::exp(-2.0 * u0.u->value(p)) * N;
  const Jet vj = v.u->jet(p, 1);
  Eigen::VectorXd out(g.d());
  for (int s = 0; s < g.d(); ++s) out(s) = scale * vj.partial(s);
  return out;
}

std::vector<SymTensorField> tangent_quadratic_generators(const MetricPatch& g, std::span<const double> p0) {
  require_gauge(g);
  require_point(g, p0);
  const int n = g.n(), d = g.d();
  const SliceValues sv = slice_values(g, p0);
  const Eigen::MatrixXd W = sv.ginv * sv.h * sv.ginv * sv.h * sv.ginv;
  int b = 0;
  for (int i = 1; i < d; ++i) {
    if (W(i, i) > W(b, b)) b = i;
  }
  if (!(W(b, b) > 1e-14)) throw UmbilicPointError("second fundamental form vanishes at p0");
  std::vector<SymTensorField> out;
  for (const auto& q : quadratic_forms(n, p0)) {
    std::vector<Expression> A(packed_size(d), num(0.0));
    A[packed_index(d, b, b)] = (num(-1.0 / (2.0 * W(b, b))) * q).folded();
    out.push_back(trace_corrected(g, A));
  }
  return out;
}

std::vector<ConformalFactor> conformal_quadratic_generators(const MetricPatch& g, const ConformalFactor& u0,
                                                             std::span<const double> p0) {
  require_point(g, p0);
  const int n = g.n();
  const double N = sff_norm_sq(g, p0, 0.0);
  if (!(N > 1e-14)) throw UmbilicPointError("|II|^2 vanishes at p0");
  const double scale = -std::exp(2.0 * u0.u->value(at_boundary(p0))) / (2.0 * N);
  std::vector<ConformalFactor> out;
  for (const auto& q : quadratic_forms(n, p0)) out.push_back({expression_field((num(scale) * q).folded(), n)});
  return out;
}

MorsifyResult morsify(const MetricPatch& g, MorsifyMode mode, const MorsifyOptions& options) {
  const int n = g.n(), d = g.d();
  MorsifyResult res;
  res.patch = g;
  res.before = find_critical_points(g, options.census);
  res.after = res.before;
  ConformalFactor u_total{constant_field(0.0, n)};
  SymTensorField k_total = SymTensorField::zero(n);
  std::mt19937_64 gen(options.seed);

  res.success = res.before.all_nondegenerate();
  for (int round = 1; round <= options.max_rounds && !res.success; ++round) {
    MorsifyRound log;
    log.p0 = center_of(res.after, d);
    log.epsilon = options.epsilon * std::pow(0.5, round - 1);
    const int count = packed_size(d);
    for (int j = 0; j < count; ++j) log.coefficients.push_back(uniform_pm1(gen));

    if (mode == MorsifyMode::kTangent) {
      const auto gens = tangent_quadratic_generators(g, log.p0);
      SymTensorField dir = gens[0].scaled(log.coefficients[0]);
      for (int j = 1; j < count; ++j) dir = dir + gens[j].scaled(log.coefficients[j]);
      res.H_bound += 10.0 * log.epsilon * cm_norm(dir, g.domain(), 2).value;
      k_total = k_total + dir.scaled(log.epsilon);
      res.patch = perturbed(g, k_total, 1.0);
    } else {
      const auto gens = conformal_quadratic_generators(g, u_total, log.p0);
      Field dir = scaled(log.coefficients[0], gens[0].u);
      for (int j = 1; j < count; ++j) dir = sum(dir, scaled(log.coefficients[j], gens[j].u));
      u_total = ConformalFactor{sum(u_total.u, scaled(log.epsilon, dir))};
      res.patch = conformal_metric(g, u_total);
    }
    res.after = find_critical_points(res.patch, options.census);
    res.success = res.after.all_nondegenerate();
    log.morse_after = res.success;
    log.min_abs_eigenvalue = res.after.min_abs_eigenvalue();
    res.log.push_back(log);
    res.rounds = round;
  }
  if (mode == MorsifyMode::kTangent) {
    res.tensor_total = k_total;
  } else {
    res.conformal_total = u_total;
  }
  res.achieved_max_H = minimality_report(res.patch, 0.0).max_abs_H;
  return res;
}

}  // namespace morsefield
