#include "morsefield/morse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "morsefield/curvature.hpp"
#include "morsefield/error.hpp"

namespace morsefield {

namespace {

bool exact_hessian(const MetricPatch& g) { return g.max_order() >= 3; }

struct Eval {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

Eval evaluate(const MetricPatch& g, const Eigen::VectorXd& x, bool need_hessian) {
  const int d = g.d();
  const std::span<const double> xs(x.data(), d);
  Eval e;
  e.grad.resize(d);
  if (need_hessian && exact_hessian(g)) {
    const Jet j = sff_norm_sq_jet(g, xs, 0.0, 2);
    e.hess.resize(d, d);
    for (int a = 0; a < d; ++a) {
      e.grad(a) = j.partial(a);
      for (int b = 0; b < d; ++b) e.hess(a, b) = j.partial(a, b);
    }
    return e;
  }
  const Jet j = sff_norm_sq_jet(g, xs, 0.0, 1);
  for (int a = 0; a < d; ++a) e.grad(a) = j.partial(a);
  if (need_hessian) e.hess = hessian_sff_norm(g, xs);
  return e;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

CriticalPointReport classify(const MetricPatch& g, const Eigen::VectorXd& x, const CensusOptions& o) {
  const Eval e = evaluate(g, x, true);
  CriticalPointReport r;
  r.x = x;
  r.gradient = e.grad;
  r.gradient_norm = e.grad.norm();
  r.hessian = 0.5 * (e.hess + e.hess.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.hessian, Eigen::EigenvaluesOnly);
  r.eigenvalues = es.eigenvalues();
  const double min_abs = r.eigenvalues.cwiseAbs().minCoeff();
  r.classification = min_abs > o.tol_degen ? Classification::kNondegenerate : Classification::kDegenerate;
  r.index = static_cast<int>((r.eigenvalues.array() < 0.0).count());
  r.near_degenerate = min_abs >= 0.5 * o.tol_degen && min_abs <= 2.0 * o.tol_degen;
  r.tol_grad = o.tol_grad;
  r.tol_degen = o.tol_degen;
  return r;
}

struct NewtonResult {
  Eigen::VectorXd x;
  SeedOutcome outcome;
  bool flat_here = false;
};

NewtonResult newton(const MetricPatch& g, const Eigen::VectorXd& seed, const CensusOptions& o, double region) {
  NewtonResult res;
  res.outcome.seed = seed;
  Eigen::VectorXd x = seed;
  Eval e = evaluate(g, x, true);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (e.hess + e.hess.transpose()), Eigen::EigenvaluesOnly);
    res.flat_here = e.grad.norm() <= o.tol_grad && es.eigenvalues().cwiseAbs().maxCoeff() <= o.tol_degen;
  }
  int it = 0;
  for (; it < o.max_iterations; ++it) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (e.hess + e.hess.transpose()));
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double cutoff = 1e-13 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    Eigen::VectorXd coeff = es.eigenvectors().transpose() * e.grad;
    for (int i = 0; i < lam.size(); ++i) coeff(i) = std::abs(lam(i)) > cutoff ? coeff(i) / lam(i) : 0.0;
    const Eigen::VectorXd step = -(es.eigenvectors() * coeff);
    if (step.norm() == 0.0) break;

    const double f0 = e.grad.squaredNorm();
    double alpha = 1.0;
    bool accepted = false;
    Eval trial;
    Eigen::VectorXd xt;
    for (int bt = 0; bt < 40; ++bt, alpha *= 0.5) {
      xt = x + alpha * step;
      if (xt.norm() > g.R()) continue;
      trial = evaluate(g, xt, true);
      if (trial.grad.squaredNorm() <= f0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x = xt;
    e = trial;
    if ((alpha * step).norm() <= 1e-10) {
      ++it;
      break;
    }
  }
  res.x = x;
  res.outcome.iterations = it;
  res.outcome.final_gradient_norm = e.grad.norm();
  res.outcome.converged = e.grad.norm() <= o.tol_grad && x.norm() <= region * (1.0 + 1e-12);
  return res;
}

}  // namespace

Eigen::VectorXd grad_sff_norm(const MetricPatch& g, std::span<const double> x) {
  const Jet j = sff_norm_sq_jet(g, x, 0.0, 1);
  Eigen::VectorXd v(g.d());
  for (int a = 0; a < g.d(); ++a) v(a) = j.partial(a);
  return v;
}

Eigen::MatrixXd hessian_sff_norm(const MetricPatch& g, std::span<const double> x) {
  const int d = g.d();
  Eigen::MatrixXd h(d, d);
  if (exact_hessian(g)) {
    const Jet j = sff_norm_sq_jet(g, x, 0.0, 2);
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) h(a, b) = j.partial(a, b);
    }
    return h;
  }
  const double step = 1e-4;
  std::vector<double> p(x.begin(), x.end());
  for (int b = 0; b < d; ++b) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    const double w[4] = {1.0, -8.0, 8.0, -1.0};
    const double off[4] = {-2.0, -1.0, 1.0, 2.0};
    for (int k = 0; k < 4; ++k) {
      p[b] = x[b] + off[k] * step;
      acc += w[k] * grad_sff_norm(g, p);
    }
    p[b] = x[b];
    h.col(b) = acc / (12.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

bool Census::all_nondegenerate() const {
  if (flat) return false;
  for (const auto& p : points) {
    if (p.classification != Classification::kNondegenerate) return false;
  }
  return true;
}

double Census::min_abs_eigenvalue() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : points) m = std::min(m, p.eigenvalues.cwiseAbs().minCoeff());
  return m;
}

std::vector<Eigen::VectorXd> census_seeds(int d, double radius, int per_axis) {
  std::vector<Eigen::VectorXd> seeds;
  std::vector<int> idx(d, 0);
  const double cell = 2.0 * radius / per_axis;
  while (true) {
    Eigen::VectorXd x(d);
    for (int a = 0; a < d; ++a) x(a) = -radius + cell * (idx[a] + 0.5);
    if (x.norm() <= radius) seeds.push_back(x);
    int a = 0;
    while (a < d && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == d) break;
  }
  return seeds;
}

Census find_critical_points(const MetricPatch& g, const CensusOptions& options) {
  const double r = options.region_radius > 0.0 ? options.region_radius : g.R();
  return find_critical_points_from(g, census_seeds(g.d(), r, options.seeds_per_axis), options);
}

Census find_critical_points_from(const MetricPatch& g, const std::vector<Eigen::VectorXd>& seeds,
                                 const CensusOptions& options) {
  const double r = options.region_radius > 0.0 ? options.region_radius : g.R();
  if (r > g.R() * (1.0 + 1e-12)) throw std::invalid_argument("census region exceeds the chart radius");

  std::vector<NewtonResult> runs(seeds.size());
  for_each_index(seeds.size(), options.exec, [&](std::size_t i) { runs[i] = newton(g, seeds[i], options, r); });

  Census c;
  c.region_radius = r;
  c.flat = !runs.empty();
  for (const auto& run : runs) {
    c.flat = c.flat && run.flat_here;
    c.seeds.push_back(run.outcome);
    if (!run.outcome.converged) ++c.non_converged;
  }
  if (c.flat) return c;

  std::vector<Eigen::VectorXd> found;
  for (const auto& run : runs) {
    if (run.outcome.converged) found.push_back(run.x);
  }
  std::sort(found.begin(), found.end(), lex_less);
  std::vector<Eigen::VectorXd> unique;
  for (const auto& x : found) {
    bool dup = false;
    for (const auto& u : unique) {
      if ((u - x).norm() <= options.dedup_radius) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(x);
  }
  c.points.resize(unique.size());
  for_each_index(unique.size(), options.exec, [&](std::size_t i) { c.points[i] = classify(g, unique[i], options); });
  return c;
}

MorseVerdict is_morse(const MetricPatch& g, const CensusOptions& options) {
  MorseVerdict v;
  v.census = find_critical_points(g, options);
  v.is_morse = v.census.all_nondegenerate();
  return v;
}

ContinuationReport continuation_experiment(const MetricPatch& g, const SymTensorField& k, double tau_max, int steps,
                                           const CensusOptions& options) {
  const Census base = find_critical_points(g, options);
  ContinuationReport rep;
  rep.persisted_to_max = true;
  bool broken = false;
  for (int i = 1; i <= steps; ++i) {
    ContinuationStep st;
    st.tau = tau_max * i / steps;
    const Census c = find_critical_points(perturbed(g, k, st.tau), options);
    st.count = static_cast<int>(c.points.size());
    st.preserved = !c.flat && c.points.size() == base.points.size();
    if (st.preserved) {
      std::vector<bool> used(c.points.size(), false);
      for (const auto& bp : base.points) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t j = 0; j < c.points.size(); ++j) {
          if (used[j]) continue;
          const double dist = (c.points[j].x - bp.x).norm();
          if (dist < best) {
            best = dist;
            arg = j;
          }
        }
        used[arg] = true;
        const auto& cp = c.points[arg];
        if (cp.classification != bp.classification || cp.index != bp.index) st.preserved = false;
        st.drift = std::max(st.drift, best);
      }
    }
    if (!st.preserved) {
      broken = true;
      rep.persisted_to_max = false;
    }
    if (!broken) {
      rep.largest_preserved_tau = st.tau;
      rep.max_drift = std::max(rep.max_drift, st.drift);
    }
    rep.steps.push_back(st);
  }
  return rep;
}

}  // namespace morsefield
