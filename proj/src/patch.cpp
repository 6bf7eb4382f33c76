#include "morsefield/patch.hpp"

#include <cmath>
#include <stdexcept>

#include "morsefield/error.hpp"

namespace morsefield {

SymmetricComponents::SymmetricComponents(int n, std::vector<Field> packed) : n_(n), packed_(std::move(packed)) {
  if (static_cast<int>(packed_.size()) != packed_size(n)) {
    throw std::invalid_argument("component count does not match dimension");
  }
  for (const auto& f : packed_) {
    if (!f || f->dim() != n) throw std::invalid_argument("component field has the wrong dimension");
  }
}

Eigen::MatrixXd SymmetricComponents::values(std::span<const double> point) const {
  Eigen::MatrixXd m(n_, n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      m(i, j) = m(j, i) = (*this)(i, j)->value(point);
    }
  }
  return m;
}

std::vector<Jet> SymmetricComponents::jets(std::span<const double> point, int order) const {
  std::vector<Jet> out;
  out.reserve(packed_.size());
  for (const auto& f : packed_) out.push_back(f->jet(point, order));
  return out;
}

int SymmetricComponents::max_order() const {
  int m = kJetMaxOrder;
  for (const auto& f : packed_) m = std::min(m, f->max_order());
  return m;
}

bool SymmetricComponents::symbolic() const {
  for (const auto& f : packed_) {
    if (!f->expression()) return false;
  }
  return true;
}

std::vector<std::vector<double>> ChartDomain::validation_points(int per_axis, int t_points) const {
  const int dd = d();
  std::vector<std::vector<double>> pts;
  std::vector<int> idx(dd, 0);
  const double step = per_axis > 1 ? 2.0 * R / (per_axis - 1) : 0.0;
  while (true) {
    std::vector<double> x(dd);
    double r2 = 0.0;
    for (int a = 0; a < dd; ++a) {
      x[a] = per_axis > 1 ? -R + step * idx[a] : 0.0;
      r2 += x[a] * x[a];
    }
    if (r2 <= R * R * (1.0 + 1e-12)) {
      for (int k = 0; k < t_points; ++k) {
        std::vector<double> p = x;
        p.push_back(t_points > 1 ? T * k / (t_points - 1) : 0.0);
        pts.push_back(std::move(p));
      }
    }
    int a = 0;
    while (a < dd && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == dd) break;
  }
  return pts;
}

MetricPatch::MetricPatch(ChartDomain domain, SymmetricComponents g, std::string name)
    : domain_(domain), g_(std::move(g)), name_(std::move(name)) {
  if (domain_.n < 2 || domain_.n > kJetMaxVars) throw std::invalid_argument("chart dimension must be 2..4");
  if (g_.n() != domain_.n) throw std::invalid_argument("component dimension does not match chart");
  if (!(domain_.R > 0.0) || !(domain_.T > 0.0)) throw std::invalid_argument("chart radius and depth must be positive");

  const int t = domain_.n - 1;
  bool structural = true;
  for (int i = 0; i < t; ++i) structural = structural && is_structurally_constant(g_(i, t), 0.0);
  structural = structural && is_structurally_constant(g_(t, t), 1.0);

  double gauge_dev = 0.0;
  for (const auto& p : domain_.validation_points()) {
    const Eigen::MatrixXd m = g_.values(p);
    if (!m.allFinite()) throw SpdViolationError("metric is not finite on the validation grid");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 0.0)) {
      throw SpdViolationError("metric is not positive definite at the validation point with t = " +
                              std::to_string(p.back()));
    }
    for (int i = 0; i < t; ++i) gauge_dev = std::max(gauge_dev, std::abs(m(i, t)));
    gauge_dev = std::max(gauge_dev, std::abs(m(t, t) - 1.0));
  }
  normal_gauge_ = g_.symbolic() ? structural : gauge_dev <= 1e-12;
}

SymTensorField::SymTensorField(SymmetricComponents k, std::optional<double> cutoff_radius)
    : k_(std::move(k)), cutoff_(cutoff_radius) {}

SymTensorField SymTensorField::zero(int n) {
  std::vector<Field> packed(packed_size(n), constant_field(0.0, n));
  return SymTensorField(SymmetricComponents(n, std::move(packed)));
}

SymTensorField SymTensorField::with_cutoff(double rho) const {
  const int n = k_.n();
  const Field bump = function_field(n, kJetMaxOrder, [n, rho](std::span<const double> p, int order) {
    double r2 = 0.0;
    for (int a = 0; a < n - 1; ++a) r2 += p[a] * p[a];
    if (r2 >= rho * rho) return Jet(n, order, 0.0);
    const auto x = coordinate_jets(p, order);
    Jet s = Jet::constant_like(x[0], 1.0);
    for (int a = 0; a < n - 1; ++a) s -= x[a] * x[a] / (rho * rho);
    return pow(s, 4);
  });
  std::vector<Field> packed;
  for (const auto& f : k_.packed()) packed.push_back(product(f, bump));
  return SymTensorField(SymmetricComponents(n, std::move(packed)), rho);
}

SymTensorField SymTensorField::scaled(double s) const {
  std::vector<Field> packed;
  for (const auto& f : k_.packed()) packed.push_back(morsefield::scaled(s, f));
  return SymTensorField(SymmetricComponents(n(), std::move(packed)), cutoff_);
}

SymTensorField SymTensorField::operator+(const SymTensorField& other) const {
  std::vector<Field> packed;
  for (std::size_t i = 0; i < k_.packed().size(); ++i) packed.push_back(sum(k_.packed()[i], other.k_.packed()[i]));
  return SymTensorField(SymmetricComponents(n(), std::move(packed)));
}

MetricPatch MetricPatch::unchecked(ChartDomain domain, SymmetricComponents g, std::string name, bool normal_gauge) {
  MetricPatch p;
  p.domain_ = domain;
  p.g_ = std::move(g);
  p.name_ = std::move(name);
  p.normal_gauge_ = normal_gauge;
  return p;
}

namespace {

SymmetricComponents perturbed_components(const MetricPatch& g, const SymTensorField& k, double tau) {
  if (k.n() != g.n()) throw std::invalid_argument("perturbation dimension mismatch");
  std::vector<Field> packed;
  for (std::size_t i = 0; i < g.components().packed().size(); ++i) {
    packed.push_back(sum(g.components().packed()[i], scaled(tau, k.components().packed()[i])));
  }
  return SymmetricComponents(g.n(), std::move(packed));
}

bool keeps_gauge(const MetricPatch& g, const SymTensorField& k) {
  const int t = g.n() - 1;
  if (!g.normal_gauge()) return false;
  for (int i = 0; i <= t; ++i) {
    if (!is_structurally_constant(k.component(i, t), 0.0)) return false;
  }
  return true;
}

}  // namespace

MetricPatch perturbed(const MetricPatch& g, const SymTensorField& k, double tau, bool validate) {
  SymmetricComponents c = perturbed_components(g, k, tau);
  if (validate) return MetricPatch(g.domain(), std::move(c), g.name());
  return MetricPatch::unchecked(g.domain(), std::move(c), g.name(), keeps_gauge(g, k));
}

MetricPatch perturbed_at(const MetricPatch& g, const SymTensorField& k, double tau, std::span<const double> check_at) {
  MetricPatch p = perturbed(g, k, tau, false);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.metric(check_at), Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues()(0) > 0.0)) throw SpdViolationError("perturbed metric is not positive definite");
  return p;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd m = a;
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(n, n);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    }
    if (!(std::abs(m(piv, c)) >= 1e-14)) throw SingularMatrixError("matrix is singular (pivot below 1e-14)");
    m.row(c).swap(m.row(piv));
    inv.row(c).swap(inv.row(piv));
    const double p = m(c, c);
    m.row(c) /= p;
    inv.row(c) /= p;
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m(r, c);
      if (f == 0.0) continue;
      m.row(r) -= f * m.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

Eigen::MatrixXd inverse_metric(const MetricPatch& g, std::span<const double> point) {
  Eigen::MatrixXd inv = checked_inverse(g.metric(point));
  return 0.5 * (inv + inv.transpose());
}

NeumannResult neumann_inverse(const Eigen::MatrixXd& g0, const Eigen::MatrixXd& k, double tau, int order) {
  if (order < 0) throw std::invalid_argument("order must be non-negative");
  const Eigen::MatrixXd g0inv = checked_inverse(g0);
  const Eigen::MatrixXd a = g0inv * k;
  NeumannResult out;
  Eigen::EigenSolver<Eigen::MatrixXd> es(tau * a, false);
  out.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  out.divergent = out.spectral_radius >= 1.0;
  Eigen::MatrixXd term = g0inv;
  out.inverse = g0inv;
  for (int l = 1; l <= order; ++l) {
    term = (-tau) * a * term;
    out.inverse += term;
  }
  return out;
}

Eigen::MatrixXd derivative_of_inverse(const MetricPatch& g, std::span<const double> point, int s) {
  const int n = g.n();
  if (s < 0 || s >= n) throw std::invalid_argument("direction index out of range");
  const auto jets = g.metric_jets(point, 1);
  Eigen::MatrixXd gm(n, n), ds(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Jet& c = jets[packed_index(n, i, j)];
      gm(i, j) = gm(j, i) = c.value();
      ds(i, j) = ds(j, i) = c.partial(s);
    }
  }
  const Eigen::MatrixXd inv = checked_inverse(gm);
  return -inv * ds * inv;
}

std::vector<Eigen::MatrixXd> christoffel(const MetricPatch& g, std::span<const double> point) {
  const int n = g.n();
  const auto jets = g.metric_jets(point, 1);
  Eigen::MatrixXd gm(n, n);
  std::vector<Eigen::MatrixXd> dg(n, Eigen::MatrixXd(n, n));  // dg[l](i, j) = d_l g_ij
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Jet& c = jets[packed_index(n, i, j)];
      gm(i, j) = gm(j, i) = c.value();
      for (int l = 0; l < n; ++l) dg[l](i, j) = dg[l](j, i) = c.partial(l);
    }
  }
  const Eigen::MatrixXd inv = checked_inverse(gm);
  std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Eigen::VectorXd lower(n);
      for (int l = 0; l < n; ++l) lower(l) = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      const Eigen::VectorXd upper = inv * lower;
      for (int k = 0; k < n; ++k) gamma[k](i, j) = gamma[k](j, i) = upper(k);
    }
  }
  return gamma;
}

TensorNormReport cm_norm(const SymTensorField& k, const ChartDomain& domain, int m, int resolution) {
  if (m < 0) throw std::invalid_argument("norm order must be non-negative");
  if (m > k.components().max_order()) throw std::invalid_argument("norm order exceeds the field backend");
  const int n = k.n();
  const auto& table = MonomialTable::get(n);
  const int nmono = table.size(m);
  const int ncomp = packed_size(n);
  std::vector<double> sup(static_cast<std::size_t>(nmono) * ncomp, 0.0);
  for (const auto& p : domain.validation_points(resolution, resolution)) {
    const auto jets = k.components().jets(p, m);
    for (int c = 0; c < ncomp; ++c) {
      for (int a = 0; a < nmono; ++a) {
        double& s = sup[static_cast<std::size_t>(c) * nmono + a];
        s = std::max(s, std::abs(jets[c].partial(table.exponent(a))));
      }
    }
  }
  TensorNormReport r;
  r.m = m;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int c = packed_index(n, i, j);
      for (int a = 0; a < nmono; ++a) r.value += sup[static_cast<std::size_t>(c) * nmono + a];
    }
  }
  return r;
}

}  // namespace morsefield
