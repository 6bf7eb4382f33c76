// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "morsefield/cli.hpp"
#include "morsefield/curvature.hpp"
#include "morsefield/error.hpp"
#include "morsefield/fixtures.hpp"
#include "morsefield/morse.hpp"
#include "morsefield/patch_file.hpp"
#include "morsefield/perturb.hpp"
#include "morsefield/verify.hpp"
#include "support/oracles.hpp"

using namespace morsefield;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "morsefield");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "morsefield_acceptance";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

std::vector<double> at_boundary(const std::vector<double>& x, double t = 0.0) {
  std::vector<double> p = x;
  p.push_back(t);
  return p;
}

Outcome fermi_reproduction() {
  Outcome o;
  std::vector<std::pair<std::string, std::string>> inputs{{"sheared", MORSEFIELD_FIXTURE_DIR "/sheared.patch"}};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::string path = scratch("general_" + std::to_string(seed) + ".patch");
    write_patch_file(path, fixtures::random_general_chart(seed));
    inputs.emplace_back("random_general_chart(" + std::to_string(seed) + ")", path);
  }
  double worst_res = 0.0, worst_time = 0.0;
  for (const auto& [label, path] : inputs) {
    const auto t0 = Clock::now();
    const CliRun r = cli({"fermi", path, "--grid", "64x32"});
    const double dt = seconds_since(t0);
    worst_time = std::max(worst_time, dt);
    if (r.code != kExitOk) {
      o.pass = false;
      o.detail += label + " exit " + std::to_string(r.code) + " " + r.err + "; ";
      continue;
    }
    const Json j = Json::parse(r.out);
    const double res = j["residuals"]["max"].get<double>();
    worst_res = std::max(worst_res, res);
    if (!(res <= 1e-8) || dt > 30.0) {
      o.pass = false;
      o.detail += label + " residual " + sci(res) + " in " + fixed(dt) + " s; ";
    }
  }
  o.detail += "11 charts, max residual " + sci(worst_res) + ", slowest " + fixed(worst_time) + " s";
  return o;
}

Outcome curvature_identities() {
  Outcome o;
  std::vector<MetricPatch> patches{fixtures::fixture_a(), fixtures::fixture_b(), fixtures::fixture_c()};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) patches.push_back(fixtures::random_normal_gauge(seed, seed % 2 ? 3 : 4));
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double route = 0.0, dif = 0.0, neumann = 0.0;
  for (const MetricPatch& g : patches) {
    const int n = g.n(), d = g.d();
    for (const auto& x : boundary_grid(d, g.R(), 5)) {
      for (double t : {0.0, 0.5 * g.T()}) {
        const Eigen::MatrixXd a = second_fundamental_form(g, x, t, SffRoute::kNormalGauge).h;
        const Eigen::MatrixXd b = second_fundamental_form(g, x, t, SffRoute::kGeneral).h;
        route = std::max(route, (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), 1e-8));
        const std::vector<double> p = at_boundary(x, std::max(t, 0.25 * g.T()));
        for (int s = 0; s < n; ++s) {
          const Eigen::MatrixXd D = derivative_of_inverse(g, p, s);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const double h1 = oracle::partial([&](const std::vector<double>& q) { return inverse_metric(g, q)(i, j); },
                                                p, s, 1e-3);
              const double h2 = oracle::partial([&](const std::vector<double>& q) { return inverse_metric(g, q)(i, j); },
                                                p, s, 5e-4);
              dif = std::max(dif, std::abs(D(i, j) - (16.0 * h2 - h1) / 15.0));
            }
          }
        }
        const Eigen::MatrixXd g0 = g.metric(p);
        Eigen::MatrixXd k = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return u(gen); });
        k = 0.5 * (k + k.transpose());
        const NeumannResult nr = neumann_inverse(g0, k, 1e-3, 3);
        neumann = std::max(neumann, (nr.inverse - (g0 + 1e-3 * k).inverse()).cwiseAbs().maxCoeff());
      }
    }
  }
  o.pass = route <= 1e-6 && dif <= 1e-8 && neumann <= 1e-8;
  o.detail = "23 patches, sff routes rel " + sci(route) + ", inverse derivative " + sci(dif) + ", Neumann " +
             sci(neumann);
  return o;
}

Outcome linearized_mean_curvature_check() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const int n = seed % 5 == 0 ? 4 : 3;
    const MetricPatch g = fixtures::random_normal_gauge(1000 + seed, n);
    const SymTensorField k = random_tangential_tensor(n, 2000 + seed);
    std::vector<double> a, b;
    for (const auto& x : boundary_grid(n - 1, g.R(), 5)) {
      a.push_back(linearized_mean_curvature(g, k, x));
      b.push_back(linearized_mean_curvature_oracle(g, k, x));
    }
    worst = std::max(worst, relative_sup_error(a, b));
  }
  double ode = 0.0;
  const auto vars = chart_variables(3);
  const Field target = expression_field(parse("0.4*x1 - x2^2 + 0.1", vars), 3);
  const Field c = expression_field(parse("1 + x1*x2", vars), 3);
  std::vector<MetricPatch> bases{fixtures::fixture_a(), fixtures::fixture_b()};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) bases.push_back(fixtures::random_normal_gauge(3000 + seed));
  for (const MetricPatch& g : bases) {
    const SymTensorField k = solve_mean_curvature_ode(g, target, c);
    for (const auto& x : boundary_grid(2, g.R(), 5)) {
      ode = std::max(ode, std::abs(linearized_mean_curvature_oracle(g, k, x) - target->value(at_boundary(x))));
    }
  }
  o.pass = worst <= 1e-5 && ode <= 1e-6;
  o.detail = "50 pairs rel " + sci(worst) + ", ODE target error " + sci(ode) + " on 7 patches";
  return o;
}

Outcome surjectivity() {
  Outcome o;
  std::vector<MetricPatch> patches{fixtures::fixture_a()};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) patches.push_back(fixtures::random_minimal(seed));
  double worst_H = 0.0, worst_target = 0.0, worst_closed = 0.0, worst_time = 0.0;
  for (const MetricPatch& g : patches) {
    const auto t0 = Clock::now();
    const std::vector<double> p0(g.d(), 0.0);
    try {
      for (int r = 0; r < g.d(); ++r) {
        const PerturbationPlan plan = build_tangent_perturbation(g, p0, r);
        const DirectionalReport rep = evaluate_plan(g, plan);
        const Eigen::VectorXd er = Eigen::VectorXd::Unit(g.d(), r);
        const Eigen::VectorXd closed = rep.closed_form ? *rep.closed_form : rep.analytic;
        worst_H = std::max(worst_H, plan.max_linearized_H);
        worst_target = std::max(worst_target, (rep.oracle - er).lpNorm<Eigen::Infinity>());
        worst_closed = std::max(worst_closed, (closed - rep.oracle).lpNorm<Eigen::Infinity>());
      }
    } catch (const Error& e) {
      o.pass = false;
      o.detail += g.name() + ": " + e.what() + "; ";
    }
    const double dt = seconds_since(t0);
    worst_time = std::max(worst_time, dt);
    if (dt > 60.0) {
      o.pass = false;
      o.detail += g.name() + " took " + fixed(dt) + " s; ";
    }
  }
  o.pass = o.pass && worst_H <= 1e-8 && worst_target <= 1e-3 && worst_closed <= 1e-4;
  o.detail += "11 patches, |lin H| " + sci(worst_H) + ", |D - e_r| " + sci(worst_target) + ", closed form " +
              sci(worst_closed) + ", slowest " + fixed(worst_time) + " s";
  return o;
}

Outcome index_claim() {
  Outcome o;
  std::mt19937_64 gen(20240611);
  std::normal_distribution<double> nd;
  double smallest = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int d = 2; d <= 5; ++d) {
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::MatrixXd h = Eigen::MatrixXd::NullaryExpr(d, d, [&]() { return nd(gen); });
      h = 0.5 * (h + h.transpose());
      h -= (h.trace() / d) * Eigen::MatrixXd::Identity(d, d);
      try {
        const IndexSelection s = find_nondegenerate_indices(h);
        smallest = std::min(smallest, std::abs(s.value));
        if (!(std::abs(s.value) > 1e-12)) ++failures;
      } catch (const NoIndicesError&) {
        ++failures;
      }
    }
  }
  bool counterexample = false;
  Eigen::MatrixXd ones(2, 2);
  ones << 1.0, 1.0, 1.0, 1.0;
  try {
    find_nondegenerate_indices(ones);
  } catch (const NoIndicesError&) {
    counterexample = true;
  }
  o.pass = failures == 0 && counterexample;
  o.detail = "4000 trace-free matrices, " + std::to_string(failures) + " without indices, smallest |value| " +
             sci(smallest) + ", [[1,1],[1,1]] " + (counterexample ? "gives NoIndices" : "did not raise");
  return o;
}

Outcome conformal_plan() {
  Outcome o;
  const MetricPatch a = fixtures::fixture_a();
  const ConformalFactor u0{constant_field(0.0, 3)};
  const std::vector<double> p0{0.0, 0.0};
  double coeff = 0.0, target = 0.0, normal = 0.0;
  for (int r = 0; r < 2; ++r) {
    const PerturbationPlan plan = build_conformal_perturbation(a, u0, p0, r);
    const ConformalFactor& v = *plan.conformal;
    for (const auto& x : boundary_grid(2, a.R(), 9)) {
      for (double t : {0.0, 0.1}) coeff = std::max(coeff, std::abs(v.u->value(at_boundary(x, t)) + x[r] / 4.0));
      normal = std::max(normal, std::abs(v.normal_derivative(a, x)));
    }
    const Eigen::VectorXd d = conformal_directional_derivative(a, u0, v, p0);
    target = std::max(target, (d - Eigen::VectorXd::Unit(2, r)).lpNorm<Eigen::Infinity>());
  }
  o.pass = coeff <= 1e-12 && target <= 1e-3 && normal == 0.0;
  o.detail = "|v + x_r/4| " + sci(coeff) + ", |D - e_r| " + sci(target) + ", max |dv/dnu| " + sci(normal);
  return o;
}

Outcome morsify_check() {
  Outcome o;
  const auto t0 = Clock::now();
  MorsifyOptions options;
  const MorsifyResult conf = morsify(fixtures::fixture_a(), MorsifyMode::kConformal, options);
  const MorsifyResult tan = morsify(fixtures::fixture_c(), MorsifyMode::kTangent, options);
  const MorseVerdict conf_census = is_morse(conf.patch);
  const MorseVerdict tan_census = is_morse(tan.patch);
  const double conf_H = minimality_report(conf.patch, 0.0).max_abs_H;
  const double tan_H = minimality_report(tan.patch, 0.0).max_abs_H;
  const double dt = seconds_since(t0);
  const bool conf_ok = conf.success && conf_census.is_morse && conf_census.census.min_abs_eigenvalue() > 1e-6 &&
                       !conf_census.census.points.empty() && conf_H <= 1e-10;
  const bool tan_ok = tan.success && tan_census.is_morse && tan_census.census.min_abs_eigenvalue() > 1e-6 &&
                      !tan_census.census.points.empty() && tan_H <= tan.H_bound;
  o.pass = conf_ok && tan_ok && dt <= 300.0;
  o.detail = "A conformal: " + std::to_string(conf_census.census.points.size()) + " points, min |eig| " +
             sci(conf_census.census.min_abs_eigenvalue()) + ", |H| " + sci(conf_H) + "; C tangent: " +
             std::to_string(tan_census.census.points.size()) + " points, min |eig| " +
             sci(tan_census.census.min_abs_eigenvalue()) + ", |H| " + sci(tan_H) + " <= 10 eps C = " +
             sci(tan.H_bound) + "; " + fixed(dt) + " s";
  return o;
}

Outcome continuation() {
  Outcome o;
  const MetricPatch b = fixtures::fixture_b();
  double worst_ratio = 0.0;
  int broken = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ContinuationReport r = continuation_experiment(b, random_tangential_tensor(3, 500 + seed), 1e-3, 10);
    for (const auto& s : r.steps) {
      if (!s.preserved) ++broken;
      worst_ratio = std::max(worst_ratio, s.drift / s.tau);
    }
  }
  o.pass = broken == 0 && worst_ratio <= 10.0;
  o.detail = "20 fields x 10 steps to tau = 1e-3, " + std::to_string(broken) + " broken steps, max drift/tau " +
             sci(worst_ratio);
  return o;
}

Outcome determinism() {
  Outcome o;
  const std::string fx = MORSEFIELD_FIXTURE_DIR;
  const std::vector<std::vector<std::string>> runs{
      {"analyze", fx + "/C.patch", "--seed", "7"},
      {"verify", fx + "/B.patch", "--seed", "7"},
      {"perturb", fx + "/C.patch", "--seed", "7"},
      {"perturb", fx + "/A.patch", "--mode", "conformal", "--target", "2", "--seed", "7"},
      {"fermi", fx + "/sheared.patch", "--grid", "16x8", "--seed", "7"}};
  int same = 0;
  for (const auto& args : runs) {
    const CliRun a = cli(args), b = cli(args);
    if (a.code == kExitOk && a.out == b.out && !a.out.empty()) {
      ++same;
    } else {
      o.pass = false;
      o.detail += args[0] + " " + std::filesystem::path(args[1]).filename().string() + " differs; ";
    }
  }
  o.detail += std::to_string(same) + "/" + std::to_string(runs.size()) + " commands byte-identical across runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 fermi reproduction", fermi_reproduction},
      {"2 curvature identities", curvature_identities},
      {"3 linearized mean curvature", linearized_mean_curvature_check},
      {"4 tangent surjectivity", surjectivity},
      {"5 index claim", index_claim},
      {"6 conformal perturbation", conformal_plan},
      {"7 morsify", morsify_check},
      {"8 continuation", continuation},
      {"9 determinism", determinism}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << std::endl;
  }
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "morsefield_acceptance");
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
