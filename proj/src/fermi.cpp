#include "morsefield/fermi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "morsefield/error.hpp"
#include "morsefield/jet_matrix.hpp"

namespace morsefield {

namespace {

/// Geodesics of the leading m x m block of g with `cols` Jacobian columns.
/// m = d runs on the boundary slice t = 0; m = n in the full collar.
/// State: q (m), v (m), dq/dx (m x cols), dv/dx (m x cols), row-major blocks.
class GeodesicSystem {
 public:
  GeodesicSystem(const MetricPatch& g, int m, int cols) : g_(g), m_(m), cols_(cols) {
    if (m < g.n() && g.symbolic()) {
      const int t = g.n() - 1;
      for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
          const Expression slice = g.component(a, b)->expression()->substitute(t, Expression::constant(0.0)).folded();
          slice_.push_back(expression_field(slice, m));
        }
      }
    }
  }

  int size() const { return 2 * m_ + 2 * m_ * cols_; }

  Eigen::VectorXd rhs(const Eigen::VectorXd& s) const {
    const int m = m_, c = cols_;
    check_inside(s);
    Christoffel ch;
    christoffel(s.data(), ch);
    const double* v = s.data() + m;
    const double* Jq = s.data() + 2 * m;
    const double* Jv = Jq + m * c;

    Eigen::VectorXd out(size());
    for (int k = 0; k < m; ++k) out(k) = v[k];
    for (int k = 0; k < m; ++k) {
      double a = 0.0;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) a -= ch.G[k][i][j] * v[i] * v[j];
      }
      out(m + k) = a;
    }
    for (int q = 0; q < m * c; ++q) out(2 * m + q) = Jv[q];
    for (int k = 0; k < m; ++k) {
      for (int col = 0; col < c; ++col) {
        double a = 0.0;
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < m; ++j) {
            double dl = 0.0;
            for (int l = 0; l < m; ++l) dl += ch.dG[k][i][j][l] * Jq[l * c + col];
            a -= dl * v[i] * v[j] + 2.0 * ch.G[k][i][j] * v[i] * Jv[j * c + col];
          }
        }
        out(2 * m + m * c + k * c + col) = a;
      }
    }
    return out;
  }

  Eigen::VectorXd rk4(Eigen::VectorXd s, double h, int steps) const {
    for (int i = 0; i < steps; ++i) s = step(s, h);
    check_inside(s);
    return s;
  }

  Eigen::VectorXd step(const Eigen::VectorXd& s, double h) const {
    const Eigen::VectorXd k1 = rhs(s);
    const Eigen::VectorXd k2 = rhs(s + 0.5 * h * k1);
    const Eigen::VectorXd k3 = rhs(s + 0.5 * h * k2);
    const Eigen::VectorXd k4 = rhs(s + h * k3);
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

 private:
  std::vector<double> chart_point(const double* q) const {
    std::vector<double> p(q, q + m_);
    if (m_ < g_.n()) p.push_back(0.0);
    return p;
  }

  void check_inside(const Eigen::VectorXd& s) const {
    const int d = g_.d();
    double r2 = 0.0;
    for (int a = 0; a < std::min(m_, d); ++a) r2 += s(a) * s(a);
    if (!std::isfinite(r2) || std::sqrt(r2) > g_.R() * (1.0 + 1e-9)) {
      throw ChartRadiusError("geodesic left the source chart radius");
    }
    if (m_ == g_.n()) {
      const double t = s(d);
      if (!(t >= -1e-9 && t <= g_.T() * (1.0 + 1e-9))) throw ChartRadiusError("normal geodesic left the source collar");
    }
  }

  static constexpr int kM = kJetMaxVars;
  using Mat = std::array<std::array<double, kM>, kM>;
  struct Christoffel {
    double G[kM][kM][kM];       // G[k][i][j] = Gamma^k_ij
    double dG[kM][kM][kM][kM];  // dG[k][i][j][l] = d_l Gamma^k_ij
  };

  void christoffel(const double* q, Christoffel& out) const {
    const int m = m_;
    const std::vector<double> p = chart_point(q);
    Eigen::MatrixXd gm(m, m);
    Mat dg[kM], ddg[kM][kM];  // dg[l][a][b] = d_l g_ab, ddg[l][r][a][b] = d_l d_r g_ab
    for (int a = 0; a < m; ++a) {
      for (int b = a; b < m; ++b) {
        const Jet j = slice_.empty() ? g_.component(a, b)->jet(p, 2) : slice_[packed_index(m, a, b)]->jet(q_span(q), 2);
        gm(a, b) = gm(b, a) = j.value();
        for (int l = 0; l < m; ++l) {
          dg[l][a][b] = dg[l][b][a] = j.partial(l);
          for (int r = l; r < m; ++r) {
            const double v = j.partial(l, r);
            ddg[l][r][a][b] = ddg[l][r][b][a] = ddg[r][l][a][b] = ddg[r][l][b][a] = v;
          }
        }
      }
    }
    const Eigen::MatrixXd inv = checked_inverse(gm);
    Mat dinv[kM];
    for (int l = 0; l < m; ++l) {
      Mat tmp{};
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          double acc = 0.0;
          for (int e = 0; e < m; ++e) acc += dg[l][a][e] * inv(e, b);
          tmp[a][b] = acc;
        }
      }
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          double acc = 0.0;
          for (int e = 0; e < m; ++e) acc += inv(a, e) * tmp[e][b];
          dinv[l][a][b] = -acc;
        }
      }
    }

    double lower[kM], dlower[kM];
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        for (int l = 0; l < m; ++l) lower[l] = 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
        for (int k = 0; k < m; ++k) {
          double acc = 0.0;
          for (int l = 0; l < m; ++l) acc += inv(k, l) * lower[l];
          out.G[k][i][j] = out.G[k][j][i] = acc;
        }
        for (int r = 0; r < m; ++r) {
          for (int l = 0; l < m; ++l) dlower[l] = 0.5 * (ddg[r][i][j][l] + ddg[r][j][i][l] - ddg[r][l][i][j]);
          for (int k = 0; k < m; ++k) {
            double acc = 0.0;
            for (int l = 0; l < m; ++l) acc += dinv[r][k][l] * lower[l] + inv(k, l) * dlower[l];
            out.dG[k][i][j][r] = out.dG[k][j][i][r] = acc;
          }
        }
      }
    }
  }

  std::span<const double> q_span(const double* q) const { return {q, static_cast<std::size_t>(m_)}; }

  const MetricPatch& g_;
  int m_, cols_;
  std::vector<Field> slice_;  // t = 0 restriction in m variables, symbolic patches only
};

std::vector<std::vector<double>> cube_corners(int d, double reach) {
  std::vector<std::vector<double>> out;
  for (int mask = 0; mask < (1 << d); ++mask) {
    std::vector<double> x(d);
    for (int a = 0; a < d; ++a) x[a] = (mask >> a & 1) ? reach : -reach;
    out.push_back(x);
  }
  return out;
}

constexpr int kMaxSteps = 1 << 14;
// Floor on normal RK4 steps over the depth; degeneracy is checked after every step.
constexpr int kMinNormalSteps = 32;

/// Smallest power-of-two multiple of `base` whose error, estimated against the
/// doubled run for a fourth-order method, meets the tolerance.
template <class Run>
std::pair<int, double> pilot_steps(int base, double tolerance, const Run& run) {
  for (int s = base; 2 * s <= kMaxSteps; s *= 2) {
    const double err = run(s, 2 * s) * 16.0 / 15.0;
    if (err <= tolerance) return {s, err};
  }
  throw IntegratorError("no step count meets the integration tolerance");
}

}  // namespace

BoundaryNormalMap::BoundaryNormalMap(const MetricPatch& g, std::span<const double> center, double reach,
                                     double tolerance, int steps)
    : g_(g), center_(Eigen::Map<const Eigen::VectorXd>(center.data(), static_cast<Eigen::Index>(center.size()))) {
  const int d = g.d();
  if (static_cast<int>(center.size()) != d) throw std::invalid_argument("center has the wrong dimension");
  std::vector<double> p(center.begin(), center.end());
  p.push_back(0.0);
  const Eigen::MatrixXd gamma = g.metric(p).topLeftCorner(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success) throw SpdViolationError("boundary metric is not positive definite at the center");
  const Eigen::MatrixXd L = llt.matrixL();
  frame_ = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(d, d));

  if (steps > 0) {
    steps_ = steps;
    return;
  }
  const auto corners = cube_corners(d, reach);
  auto run = [&](int s1, int s2) {
    double err = 0.0;
    for (const auto& x : corners) {
      steps_ = s1;
      const Image a = map(x);
      steps_ = s2;
      const Image b = map(x);
      err = std::max(err, (a.y - b.y).lpNorm<Eigen::Infinity>());
      err = std::max(err, (a.jacobian - b.jacobian).lpNorm<Eigen::Infinity>());
    }
    return err;
  };
  std::tie(steps_, error_) = pilot_steps(4, tolerance, run);
}

BoundaryNormalMap::Image BoundaryNormalMap::map(std::span<const double> x) const {
  const int d = g_.d();
  const GeodesicSystem sys(g_, d, d);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(sys.size());
  const Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), d);
  s.head(d) = center_;
  s.segment(d, d) = frame_ * xv;
  for (int k = 0; k < d; ++k) {
    for (int c = 0; c < d; ++c) s(2 * d + d * d + k * d + c) = frame_(k, c);
  }
  s = sys.rk4(s, 1.0 / steps_, steps_);
  Image img;
  img.y = s.head(d);
  img.jacobian.resize(d, d);
  for (int k = 0; k < d; ++k) {
    for (int c = 0; c < d; ++c) img.jacobian(k, c) = s(2 * d + k * d + c);
  }
  return img;
}

Eigen::MatrixXd BoundaryNormalMap::induced_metric(std::span<const double> x) const {
  const int d = g_.d();
  const Image img = map(x);
  std::vector<double> p(img.y.data(), img.y.data() + d);
  p.push_back(0.0);
  const Eigen::MatrixXd gamma = g_.metric(p).topLeftCorner(d, d);
  return img.jacobian.transpose() * gamma * img.jacobian;
}

BoundaryNormalMap boundary_normal_coordinates(const MetricPatch& g, std::span<const double> pbar, double reach) {
  return BoundaryNormalMap(g, pbar, reach);
}

double FermiResiduals::max() const {
  return std::max({identity, first_derivatives, mixed_boundary, normal_boundary, mixed_collar, normal_collar});
}

FermiResiduals validate_fermi(const MetricPatch& patch, int per_axis) {
  const int n = patch.n(), d = patch.d(), t = n - 1;
  FermiResiduals r;
  const std::vector<double> origin(n, 0.0);
  const auto jets = patch.metric_jets(origin, 1);
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const Jet& c = jets[packed_index(n, i, j)];
      r.identity = std::max(r.identity, std::abs(c.value() - (i == j ? 1.0 : 0.0)));
      for (int s = 0; s < d; ++s) r.first_derivatives = std::max(r.first_derivatives, std::abs(c.partial(s)));
    }
  }
  for (const auto& p : patch.domain().validation_points(per_axis, 9)) {
    const Eigen::MatrixXd m = patch.metric(p);
    double mixed = 0.0;
    for (int i = 0; i < d; ++i) mixed = std::max(mixed, std::abs(m(i, t)));
    const double normal = std::abs(m(t, t) - 1.0);
    r.mixed_collar = std::max(r.mixed_collar, mixed);
    r.normal_collar = std::max(r.normal_collar, normal);
    if (p[t] == 0.0) {
      r.mixed_boundary = std::max(r.mixed_boundary, mixed);
      r.normal_boundary = std::max(r.normal_boundary, normal);
    }
  }
  return r;
}

FermiChartResult fermi_chart(const MetricPatch& g, std::span<const double> pbar, const FermiOptions& options) {
  const int n = g.n(), d = g.d(), t = n - 1;
  if (static_cast<int>(pbar.size()) != d) throw std::invalid_argument("center has the wrong dimension");
  if (!(options.radius > 0.0) || !(options.depth > 0.0)) throw std::invalid_argument("radius and depth must be positive");
  if (options.depth > g.T() * (1.0 + 1e-12)) throw ChartRadiusError("requested depth exceeds the source collar");

  const BoundaryNormalMap bmap(g, pbar, options.radius, options.tolerance, options.boundary_steps);
  const GridSpec spec{n, options.radius, options.depth, options.cells_x, options.cells_t};
  const GeodesicSystem sys(g, n, d);

  auto initial_state = [&](std::span<const double> x) {
    const BoundaryNormalMap::Image img = bmap.map(x);
    std::vector<double> p(img.y.data(), img.y.data() + d);
    p.push_back(0.0);
    const auto jets = g.metric_jets(p, 1);
    const JetMatrix inv = symmetric_from_packed(jets, n, n).inverse();
    const Jet scale = reciprocal(sqrt(inv(t, t)));
    Eigen::VectorXd s = Eigen::VectorXd::Zero(sys.size());
    for (int k = 0; k < d; ++k) s(k) = img.y(k);
    for (int a = 0; a < n; ++a) {
      const Jet N = inv(a, t) * scale;
      s(n + a) = N.value();
      for (int c = 0; c < d; ++c) {
        if (a < d) s(2 * n + a * d + c) = img.jacobian(a, c);
        double dv = 0.0;
        for (int b = 0; b < d; ++b) dv += N.partial(b) * img.jacobian(b, c);
        s(2 * n + n * d + a * d + c) = dv;
      }
    }
    return s;
  };
  auto jacobian = [&](const Eigen::VectorXd& s) {
    Eigen::MatrixXd J(n, n);
    for (int a = 0; a < n; ++a) {
      for (int c = 0; c < d; ++c) J(a, c) = s(2 * n + a * d + c);
      J(a, t) = s(n + a);
    }
    return J;
  };
  auto chart_metric = [&](const Eigen::VectorXd& s) {
    const Eigen::MatrixXd J = jacobian(s);
    std::vector<double> q(s.data(), s.data() + n);
    return Eigen::MatrixXd(J.transpose() * g.metric(q) * J);
  };

  FermiChartResult res;
  res.center.assign(pbar.begin(), pbar.end());
  res.stats.boundary_steps = bmap.steps();
  res.stats.boundary_error_estimate = bmap.error_estimate();

  int per_cell = options.normal_steps_per_cell;
  if (per_cell <= 0) {
    auto pilots = cube_corners(d, options.radius);
    pilots.push_back(std::vector<double>(d, 0.0));
    auto run = [&](int s1, int s2) {
      double err = 0.0;
      for (const auto& x : pilots) {
        const Eigen::VectorXd s0 = initial_state(x);
        const Eigen::VectorXd a = sys.rk4(s0, options.depth / s1, s1);
        const Eigen::VectorXd b = sys.rk4(s0, options.depth / s2, s2);
        err = std::max(err, (a - b).lpNorm<Eigen::Infinity>());
      }
      return err;
    };
    const auto [steps, err] = pilot_steps(options.cells_t, options.tolerance, run);
    per_cell = std::max(steps / options.cells_t, (kMinNormalSteps + options.cells_t - 1) / options.cells_t);
    res.stats.normal_error_estimate = err;
  }
  res.stats.normal_steps = per_cell * options.cells_t;

  const int nx = spec.nodes_x();
  std::size_t boundary_nodes = 1;
  for (int a = 0; a < d; ++a) boundary_nodes *= nx;
  res.stats.geodesics = boundary_nodes;
  std::vector<std::vector<double>> samples(packed_size(n), std::vector<double>(spec.node_count()));
  const double h = options.depth / res.stats.normal_steps;

  for_each_index(boundary_nodes, options.exec, [&](std::size_t b) {
    std::vector<int> idx(n, 0);
    std::size_t rem = b;
    for (int a = 0; a < d; ++a) {
      idx[a] = static_cast<int>(rem % nx);
      rem /= nx;
    }
    const std::vector<double> node = spec.node(idx);
    Eigen::VectorXd s = initial_state(std::span<const double>(node.data(), d));
    double det0 = 0.0;
    double orientation = 0.0;
    auto nondegenerate = [&](const Eigen::MatrixXd& G) {
      if (!(G.determinant() > 1e-6 * det0) || !(jacobian(s).determinant() * orientation > 0.0)) {
        throw FocalPointError("normal exponential map degenerates before the requested depth");
      }
    };
    for (int j = 0; j <= options.cells_t; ++j) {
      if (j > 0) {
        for (int k = 1; k < per_cell; ++k) {
          s = sys.rk4(s, h, 1);
          nondegenerate(chart_metric(s));
        }
        s = sys.rk4(s, h, 1);
      }
      const Eigen::MatrixXd G = chart_metric(s);
      if (j == 0) {
        det0 = G.determinant();
        orientation = jacobian(s).determinant() > 0.0 ? 1.0 : -1.0;
      }
      nondegenerate(G);
      idx[t] = j;
      const std::size_t f = spec.flat_index(idx);
      for (int a = 0; a < n; ++a) {
        for (int c = a; c < n; ++c) samples[packed_index(n, a, c)][f] = G(a, c);
      }
    }
  });

  const std::string name = (g.name().empty() ? std::string("patch") : g.name()) + "-fermi";
  res.residuals = validate_fermi(grid_patch(spec, samples, name));
  res.normal_gauge = res.residuals.mixed_collar <= options.gauge_tolerance &&
                     res.residuals.normal_collar <= options.gauge_tolerance;
  if (res.normal_gauge) {
    for (int a = 0; a < d; ++a) std::fill(samples[packed_index(n, a, t)].begin(), samples[packed_index(n, a, t)].end(), 0.0);
    std::fill(samples[packed_index(n, t, t)].begin(), samples[packed_index(n, t, t)].end(), 1.0);
  }
  res.patch = grid_patch(spec, samples, name);

  res.grid.spec = spec;
  res.grid.name = name;
  res.grid.components = std::move(samples);
  auto& meta = res.grid.metadata;
  meta["source"] = g.name();
  meta["center"] = res.center;
  meta["normal_gauge"] = res.normal_gauge;
  meta["residuals"] = {{"identity", res.residuals.identity},
                       {"first_derivatives", res.residuals.first_derivatives},
                       {"mixed_boundary", res.residuals.mixed_boundary},
                       {"normal_boundary", res.residuals.normal_boundary},
                       {"mixed_collar", res.residuals.mixed_collar},
                       {"normal_collar", res.residuals.normal_collar}};
  meta["integrator"] = {{"method", "rk4"},
                        {"boundary_steps", res.stats.boundary_steps},
                        {"normal_steps", res.stats.normal_steps},
                        {"boundary_error_estimate", res.stats.boundary_error_estimate},
                        {"normal_error_estimate", res.stats.normal_error_estimate}};
  return res;
}

}  // namespace morsefield
