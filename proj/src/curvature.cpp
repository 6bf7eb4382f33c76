#include "morsefield/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "morsefield/error.hpp"

namespace morsefield {

namespace {

std::vector<double> chart_point(std::span<const double> x, double t) {
  std::vector<double> p(x.begin(), x.end());
  p.push_back(t);
  return p;
}

SffRoute resolve(const MetricPatch& g, SffRoute route) {
  if (route == SffRoute::kAuto) return g.normal_gauge() ? SffRoute::kNormalGauge : SffRoute::kGeneral;
  if (route == SffRoute::kNormalGauge && !g.normal_gauge()) {
    throw GaugeError("the -1/2 d_t g formula needs a normal-gauge patch");
  }
  return route;
}

}  // namespace

SliceGeometry slice_geometry(const MetricPatch& g, std::span<const double> x, double t, int order, SffRoute route) {
  const int n = g.n();
  const int d = n - 1;
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("boundary point has the wrong dimension");
  if (order + 1 > g.max_order()) throw std::invalid_argument("patch backend cannot supply the requested order");
  route = resolve(g, route);

  const auto p = chart_point(x, t);
  const auto jets = g.metric_jets(p, order + 1);
  std::vector<Jet> low;
  low.reserve(jets.size());
  for (const auto& j : jets) low.push_back(j.truncated(order));

  SliceGeometry out;
  out.gamma = symmetric_from_packed(low, n, d);
  out.gamma_inv = out.gamma.inverse();
  out.h = JetMatrix(d, d, low.front());

  if (route == SffRoute::kNormalGauge) {
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        out.h(i, j) = out.h(j, i) = jets[packed_index(n, i, j)].derivative(n - 1) * -0.5;
      }
    }
    return out;
  }

  const JetMatrix ginv = symmetric_from_packed(low, n, n).inverse();
  // dg[l][packed] = d_l g
  std::vector<std::vector<Jet>> dg(n);
  for (int l = 0; l < n; ++l) {
    dg[l].reserve(jets.size());
    for (const auto& j : jets) dg[l].push_back(j.derivative(l));
  }
  auto D = [&](int l, int a, int b) -> const Jet& { return dg[l][packed_index(n, a, b)]; };
  const Jet inv_norm = reciprocal(sqrt(ginv(n - 1, n - 1)));
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      Jet s = Jet::constant_like(low.front(), 0.0);
      for (int l = 0; l < n; ++l) s += ginv(n - 1, l) * (D(i, j, l) + D(j, i, l) - D(l, i, j));
      out.h(i, j) = out.h(j, i) = s * 0.5 * inv_norm;
    }
  }
  return out;
}

Jet mean_curvature_jet(const MetricPatch& g, std::span<const double> x, double t, int order, SffRoute route) {
  const SliceGeometry s = slice_geometry(g, x, t, order, route);
  return contract(s.gamma_inv, s.h);
}

Jet sff_norm_sq_jet(const MetricPatch& g, std::span<const double> x, double t, int order, SffRoute route) {
  const SliceGeometry s = slice_geometry(g, x, t, order, route);
  const JetMatrix a = s.gamma_inv * s.h;
  return contract(a, a.transpose());
}

SecondFundamentalForm second_fundamental_form(const MetricPatch& g, std::span<const double> x, double t,
                                              SffRoute route) {
  const SliceGeometry s = slice_geometry(g, x, t, 0, route);
  SecondFundamentalForm out;
  out.point = chart_point(x, t);
  out.h = s.h.values();
  out.gamma = s.gamma.values();
  return out;
}

double mean_curvature(const MetricPatch& g, std::span<const double> x, double t, SffRoute route) {
  return mean_curvature_jet(g, x, t, 0, route).value();
}

double sff_norm_sq(const MetricPatch& g, std::span<const double> x, double t, SffRoute route) {
  return sff_norm_sq_jet(g, x, t, 0, route).value();
}

std::vector<std::vector<double>> boundary_grid(int d, double R, int per_axis) {
  ChartDomain dom{d + 1, R, 1.0};
  std::vector<std::vector<double>> out;
  for (auto p : dom.validation_points(per_axis, 1)) {
    p.pop_back();
    out.push_back(std::move(p));
  }
  return out;
}

MinimalityReport minimality_report(const MetricPatch& g, double tol, int per_axis, Execution exec) {
  const auto pts = boundary_grid(g.d(), g.R(), per_axis);
  std::vector<double> H(pts.size()), N(pts.size());
  for_each_index(pts.size(), exec, [&](std::size_t i) {
    const SliceGeometry s = slice_geometry(g, pts[i], 0.0, 0);
    H[i] = std::abs(contract(s.gamma_inv, s.h).value());
    const JetMatrix a = s.gamma_inv * s.h;
    N[i] = contract(a, a.transpose()).value();
  });
  MinimalityReport r;
  r.min_sff_norm_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    r.max_abs_H = std::max(r.max_abs_H, H[i]);
    r.min_sff_norm_sq = std::min(r.min_sff_norm_sq, N[i]);
  }
  r.is_minimal = r.max_abs_H <= tol;
  r.nowhere_umbilic = r.min_sff_norm_sq > tol;
  return r;
}

double ConformalFactor::normal_derivative(const MetricPatch& g, std::span<const double> x) const {
  const auto p = chart_point(x, 0.0);
  const int t = g.n() - 1;
  const Eigen::MatrixXd ginv = inverse_metric(g, p);
  const Jet du = u->jet(p, 1);
  double acc = 0.0;
  for (int a = 0; a < g.n(); ++a) acc += ginv(a, t) * du.partial(a);
  return -acc / std::sqrt(ginv(t, t));
}

bool ConformalFactor::in_theta(const MetricPatch& g, double tol, int per_axis) const {
  for (const auto& x : boundary_grid(g.d(), g.R(), per_axis)) {
    if (std::abs(normal_derivative(g, x)) > tol) return false;
  }
  return true;
}

ConformalFactor theta_lift(const MetricPatch& g, const Field& b) {
  const int n = g.n(), t = n - 1;
  if (b->dim() != n) throw std::invalid_argument("conformal factor dimension mismatch");
  const int order = std::min(g.max_order(), b->max_order() - 1);
  const Field w = function_field(n, order, [g, b, n, t](std::span<const double> p, int k) {
    std::vector<double> base(p.begin(), p.end());
    base[t] = 0.0;
    const JetMatrix ginv = symmetric_from_packed(g.metric_jets(base, k), n, n).inverse();
    const Jet db = b->jet(base, k + 1);
    Jet acc = db.derivative(0) * ginv(0, t);
    for (int i = 1; i < t; ++i) acc = acc + db.derivative(i) * ginv(i, t);
    return (acc / ginv(t, t) * -1.0).without_var(t);
  });
  const Field tf = expression_field(Expression::variable(t, chart_variables(n)[t]), n);
  return ConformalFactor{sum(b, product(tf, w))};
}

MetricPatch conformal_metric(const MetricPatch& g, const ConformalFactor& u) {
  if (u.u->dim() != g.n()) throw std::invalid_argument("conformal factor dimension mismatch");
  const Field factor = exp_scaled(2.0, u.u);
  std::vector<Field> packed;
  for (const auto& c : g.components().packed()) packed.push_back(product(factor, c));
  return MetricPatch(g.domain(), SymmetricComponents(g.n(), std::move(packed)), g.name());
}

double conformal_mean_curvature(double H_base, double u_value, double du_dnu, int boundary_dim) {
  return std::exp(-u_value) * (H_base + boundary_dim * du_dnu);
}

double verify_conformal_norm_law(const MetricPatch& g, const ConformalFactor& u, int per_axis) {
  if (!u.in_theta(g)) throw ThetaViolationError("conformal factor has nonzero normal derivative");
  const MetricPatch gh = conformal_metric(g, u);
  double diff = 0.0, scale = 1e-8;
  for (const auto& x : boundary_grid(g.d(), g.R(), per_axis)) {
    const double base = sff_norm_sq(g, x, 0.0);
    const double conf = sff_norm_sq(gh, x, 0.0, SffRoute::kGeneral);
    const double predicted = std::exp(-2.0 * u.u->value(chart_point(x, 0.0))) * base;
    diff = std::max(diff, std::abs(conf - predicted));
    scale = std::max(scale, std::abs(predicted));
  }
  return diff / scale;
}

}  // namespace morsefield
