#include "morsefield/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "morsefield/error.hpp"
#include "morsefield/fermi.hpp"
#include "morsefield/patch_file.hpp"
#include "morsefield/perturb.hpp"
#include "morsefield/report.hpp"
#include "morsefield/verify.hpp"

namespace morsefield {

namespace {

constexpr std::uint64_t kDefaultSeed = 20240611;

struct CommonFlags {
  std::string file;
  double tol_grad = 1e-8;
  double tol_degen = 1e-6;
  std::string grid;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::string out;
  std::string format = "json";
  bool timings = false;
};

struct PerturbFlags {
  std::string mode = "tangent";
  std::optional<int> target;
  double epsilon = 1e-2;
  int rounds = 3;
  std::string out_patch;
};

struct FermiFlags {
  std::string center;
  std::optional<double> radius;
  std::optional<double> depth;
  std::string out_patch;
};

/// Thrown for bad flag values; maps to kExitInput.
class UsageError : public Error {
 public:
  using Error::Error;
};

class Timer {
 public:
  void mark(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    phases_.emplace_back(phase, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }
  Json json() const {
    Json j;
    double total = 0.0;
    for (const auto& [phase, s] : phases_) {
      j[phase] = s;
      total += s;
    }
    j["total"] = total;
    return j;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, double>> phases_;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("file", f.file, "Patch definition or binary grid file")->required();
  sub->add_option("--tol-grad", f.tol_grad, "Gradient-norm tolerance of critical points");
  sub->add_option("--tol-degen", f.tol_degen, "Smallest |Hessian eigenvalue| counted as nondegenerate");
  sub->add_option("--grid", f.grid, "Census seeds per axis (analyze, perturb) or NxM cells (fermi)");
  sub->add_option("--seed", f.seed, "RNG seed (overrides MORSEFIELD_SEED)");
  sub->add_flag("--strict", f.strict, "Exit 1 when the census is not Morse");
  sub->add_option("--out", f.out, "Write the report here instead of stdout");
  sub->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_flag("--timings", f.timings, "Include wall-clock timings in the report");
}

std::uint64_t resolve_seed(const CommonFlags& f) {
  if (f.seed) return *f.seed;
  if (const char* env = std::getenv("MORSEFIELD_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError(std::string("MORSEFIELD_SEED is not an unsigned integer: ") + env);
    return v;
  }
  return kDefaultSeed;
}

int seeds_per_axis(const CommonFlags& f) {
  if (f.grid.empty()) return CensusOptions{}.seeds_per_axis;
  char* end = nullptr;
  const long v = std::strtol(f.grid.c_str(), &end, 10);
  if (*end != '\0' || v < 1 || v > 256) throw UsageError("--grid must be a seed count in 1..256, got '" + f.grid + "'");
  return static_cast<int>(v);
}

std::pair<int, int> fermi_cells(const CommonFlags& f) {
  if (f.grid.empty()) return {64, 32};
  int nx = 0, nt = 0;
  char tail = 0;
  if (std::sscanf(f.grid.c_str(), "%dx%d%c", &nx, &nt, &tail) != 2 || nx < 6 || nt < 6) {
    throw UsageError("--grid must be NxM cells with N, M >= 6, got '" + f.grid + "'");
  }
  return {nx, nt};
}

std::vector<double> parse_center(const std::string& text, int d) {
  if (text.empty()) return std::vector<double>(d, 0.0);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0') throw UsageError("--center must be comma-separated numbers, got '" + text + "'");
    out.push_back(v);
  }
  if (static_cast<int>(out.size()) != d) {
    throw UsageError("--center needs " + std::to_string(d) + " coordinates, got " + std::to_string(out.size()));
  }
  return out;
}

CensusOptions census_options(const CommonFlags& f) {
  CensusOptions c;
  c.tol_grad = f.tol_grad;
  c.tol_degen = f.tol_degen;
  c.seeds_per_axis = seeds_per_axis(f);
  c.exec = Execution::kParallel;
  return c;
}

Json header(const std::string& command, const LoadedPatch& in, std::uint64_t seed) {
  Json j;
  j["schema"] = kReportSchema;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["input"] = {{"file", std::filesystem::path(in.path).filename().string()},
                {"digest", "fnv1a64:" + fnv1a64_hex(in.bytes)}};
  const MetricPatch& g = in.patch;
  j["patch"] = {{"name", g.name()},
                {"n", g.n()},
                {"R", g.R()},
                {"T", g.T()},
                {"normal_gauge", g.normal_gauge()},
                {"backend", in.grid ? "grid" : "expression"}};
  j["seed"] = seed;
  return j;
}

Json checks_json(const std::vector<CheckResult>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json e;
    e["name"] = c.name;
    e["residual"] = c.skipped ? Json(nullptr) : number_json(c.residual);
    e["tolerance"] = c.tolerance;
    e["skipped"] = c.skipped;
    e["passed"] = c.passed();
    if (!c.note.empty()) e["note"] = c.note;
    arr.push_back(std::move(e));
  }
  return arr;
}

void reject_asymmetric(const LoadedPatch& in) {
  for (const auto& m : in.mirrors) {
    if (mirror_mismatch(m, in.patch.domain()) > 1e-12) {
      throw PatchFileError(in.path, m.lower_line,
                           "g." + std::to_string(m.j + 1) + "." + std::to_string(m.i + 1) + " differs from g." +
                               std::to_string(m.i + 1) + "." + std::to_string(m.j + 1) + " (line " +
                               std::to_string(m.upper_line) + ")");
    }
  }
}

GridFile resample(const MetricPatch& g, const GridFile& like) {
  GridFile out;
  out.spec = like.spec;
  out.name = g.name();
  out.metadata = like.metadata;
  const int n = g.n();
  out.components.assign(packed_size(n), std::vector<double>(like.spec.node_count()));
  std::vector<int> idx(n, 0);
  const int nx = like.spec.nodes_x(), nt = like.spec.nodes_t();
  for (std::size_t f = 0; f < like.spec.node_count(); ++f) {
    std::size_t rem = f;
    for (int a = 0; a < n - 1; ++a) {
      idx[a] = static_cast<int>(rem % nx);
      rem /= nx;
    }
    idx[n - 1] = static_cast<int>(rem % nt);
    const Eigen::MatrixXd m = g.metric(like.spec.node(idx));
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) out.components[packed_index(n, a, b)][f] = m(a, b);
    }
  }
  return out;
}

int cmd_analyze(const CommonFlags& f, const LoadedPatch& in, Json& report, Timer& timer) {
  reject_asymmetric(in);
  const MetricPatch& g = in.patch;
  const CensusOptions opts = census_options(f);
  report["options"] = {{"tol_grad", f.tol_grad}, {"tol_degen", f.tol_degen}, {"seeds_per_axis", opts.seeds_per_axis},
                       {"strict", f.strict}};
  report["minimality"] = minimality_json(minimality_report(g, 1e-8, 33, Execution::kParallel));
  const MorseVerdict v = is_morse(g, opts);
  timer.mark("census");
  report["morse"] = v.is_morse;
  report["census"] = census_json(v.census);
  VerifyOptions vo;
  vo.seed = report["seed"].get<std::uint64_t>();
  vo.perturbation_checks = false;
  report["identity_checks"] = checks_json(identity_suite(g, in.mirrors, vo));
  timer.mark("identity_checks");
  return f.strict && !v.is_morse ? kExitFailure : kExitOk;
}

int cmd_verify(const CommonFlags& f, const LoadedPatch& in, Json& report, Timer& timer) {
  VerifyOptions vo;
  vo.seed = report["seed"].get<std::uint64_t>();
  const auto checks = identity_suite(in.patch, in.mirrors, vo);
  timer.mark("checks");
  bool ok = true;
  for (const auto& c : checks) ok = ok && c.passed();
  report["checks"] = checks_json(checks);
  report["passed"] = ok;
  (void)f;
  return ok ? kExitOk : kExitFailure;
}

int cmd_perturb(const CommonFlags& f, const PerturbFlags& p, const LoadedPatch& in, Json& report, Timer& timer) {
  reject_asymmetric(in);
  const MetricPatch& g = in.patch;
  if (p.mode != "tangent" && p.mode != "conformal") throw UsageError("--mode must be tangent or conformal");
  if (p.target && (*p.target < 1 || *p.target > g.d())) {
    throw UsageError("--target must be in 1.." + std::to_string(g.d()));
  }
  if (!(p.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  if (p.rounds < 1) throw UsageError("--rounds must be at least 1");
  if (!g.normal_gauge()) throw GaugeError("perturb needs a normal-gauge patch; run fermi first");
  const MinimalityReport minimality = minimality_report(g, 1e-8, 33, Execution::kParallel);
  if (!minimality.is_minimal) throw InvariantError("perturb needs a minimal boundary (max |H| = " +
                                                   std::to_string(minimality.max_abs_H) + ")");

  MorsifyOptions mo;
  mo.epsilon = p.epsilon;
  mo.max_rounds = p.rounds;
  mo.seed = report["seed"].get<std::uint64_t>();
  mo.census = census_options(f);
  report["options"] = {{"mode", p.mode}, {"epsilon", p.epsilon}, {"rounds", p.rounds},
                       {"tol_grad", f.tol_grad}, {"tol_degen", f.tol_degen},
                       {"seeds_per_axis", mo.census.seeds_per_axis}};
  report["minimality"] = minimality_json(minimality);

  Json plans = Json::array();
  if (p.target) {
    const std::vector<double> p0(g.d(), 0.0);
    const int r = *p.target - 1;
    Json entry;
    if (p.mode == "tangent") {
      const PerturbationPlan plan = build_tangent_perturbation(g, p0, r);
      entry = plan_json(plan);
      entry["directional"] = directional_json(evaluate_plan(g, plan));
    } else {
      const ConformalFactor u0{constant_field(0.0, g.n())};
      const PerturbationPlan plan = build_conformal_perturbation(g, u0, p0, r);
      entry = plan_json(plan);
      DirectionalReport rep;
      rep.oracle = conformal_directional_derivative(g, u0, *plan.conformal, p0);
      rep.analytic = conformal_closed_form(g, u0, *plan.conformal, p0);
      entry["directional"] = directional_json(rep);
    }
    plans.push_back(std::move(entry));
    timer.mark("plan");
  }
  report["plans"] = std::move(plans);

  const MorsifyResult res = morsify(g, p.mode == "tangent" ? MorsifyMode::kTangent : MorsifyMode::kConformal, mo);
  timer.mark("morsify");
  report["morsify"] = morsify_json(res);

  if (!p.out_patch.empty()) {
    if (in.grid) {
      write_grid_file(p.out_patch, resample(res.patch, *in.grid));
    } else {
      write_patch_file(p.out_patch, res.patch);
    }
    report["output_patch"] = std::filesystem::path(p.out_patch).filename().string();
  } else {
    report["output_patch"] = nullptr;
  }
  return res.success ? kExitOk : kExitFailure;
}

int cmd_fermi(const CommonFlags& f, const FermiFlags& ff, const LoadedPatch& in, Json& report, Timer& timer) {
  reject_asymmetric(in);
  const MetricPatch& g = in.patch;
  FermiOptions fo;
  std::tie(fo.cells_x, fo.cells_t) = fermi_cells(f);
  fo.radius = ff.radius.value_or(std::min(fo.radius, 0.95 * g.R() / std::sqrt(static_cast<double>(g.d()))));
  fo.depth = ff.depth.value_or(std::min(fo.depth, g.T()));
  const std::vector<double> center = parse_center(ff.center, g.d());
  report["options"] = {{"center", center}, {"radius", fo.radius}, {"depth", fo.depth},
                       {"cells_x", fo.cells_x}, {"cells_t", fo.cells_t}, {"tolerance", fo.tolerance}};
  FermiChartResult res = fermi_chart(g, center, fo);
  timer.mark("fermi");
  report["normal_gauge"] = res.normal_gauge;
  report["residuals"] = fermi_residuals_json(res.residuals);
  report["integrator"] = integrator_json(res.stats);
  if (!ff.out_patch.empty()) {
    res.grid.metadata["input_digest"] = "fnv1a64:" + fnv1a64_hex(in.bytes);
    write_grid_file(ff.out_patch, res.grid);
    report["output_patch"] = std::filesystem::path(ff.out_patch).filename().string();
  } else {
    report["output_patch"] = nullptr;
  }
  const bool ok = res.residuals.max() <= 1e-8;
  report["passed"] = ok;
  return ok ? kExitOk : kExitFailure;
}

bool is_geometric(const Error& e) {
  return dynamic_cast<const UmbilicPointError*>(&e) || dynamic_cast<const FocalPointError*>(&e) ||
         dynamic_cast<const ChartRadiusError*>(&e) || dynamic_cast<const IntegratorError*>(&e) ||
         dynamic_cast<const InvariantError*>(&e) || dynamic_cast<const NoIndicesError*>(&e) ||
         dynamic_cast<const GaugeError*>(&e) || dynamic_cast<const RankError*>(&e) ||
         dynamic_cast<const SingularMatrixError*>(&e) || dynamic_cast<const ThetaViolationError*>(&e) ||
         dynamic_cast<const SpdViolationError*>(&e) || dynamic_cast<const DomainError*>(&e);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Boundary curvature, Morse analysis and admissible perturbations of metric patches", "morsefield"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonFlags common;
  PerturbFlags pf;
  FermiFlags ff;
  auto* analyze = app.add_subcommand("analyze", "Minimality report and Morse census of |II|^2");
  auto* perturb = app.add_subcommand("perturb", "Make the census Morse with admissible perturbations");
  auto* verify = app.add_subcommand("verify", "Run the identity suite");
  auto* fermi = app.add_subcommand("fermi", "Build a normal-gauge grid patch around a boundary point");
  for (auto* sub : {analyze, perturb, verify, fermi}) add_common(sub, common);
  perturb->add_option("--mode", pf.mode, "tangent or conformal")->check(CLI::IsMember({"tangent", "conformal"}));
  perturb->add_option("--target", pf.target, "Also build and check the plan for direction e_r (1-based)");
  perturb->add_option("--epsilon", pf.epsilon, "First-round perturbation size (halved each round)");
  perturb->add_option("--rounds", pf.rounds, "Maximum number of rounds");
  perturb->add_option("--out-patch", pf.out_patch, "Write the perturbed patch here");
  fermi->add_option("--center", ff.center, "Boundary point, comma-separated (default origin)");
  fermi->add_option("--radius", ff.radius, "Half-width of the output chart");
  fermi->add_option("--depth", ff.depth, "Collar depth of the output chart");
  fermi->add_option("--out-patch", ff.out_patch, "Write the binary grid patch here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  Timer timer;
  std::string command;
  int code = kExitOk;
  Json report;
  try {
    const std::uint64_t seed = resolve_seed(common);
    const LoadedPatch in = load_patch_file(common.file);
    timer.mark("load");
    if (analyze->parsed()) command = "analyze";
    if (perturb->parsed()) command = "perturb";
    if (verify->parsed()) command = "verify";
    if (fermi->parsed()) command = "fermi";
    report = header(command, in, seed);
    try {
      if (command == "analyze") code = cmd_analyze(common, in, report, timer);
      if (command == "perturb") code = cmd_perturb(common, pf, in, report, timer);
      if (command == "verify") code = cmd_verify(common, in, report, timer);
      if (command == "fermi") code = cmd_fermi(common, ff, in, report, timer);
    } catch (const UsageError&) {
      throw;
    } catch (const PatchFileError&) {
      throw;
    } catch (const Error& e) {
      if (!is_geometric(e)) throw;
      err << "morsefield: " << e.what() << "\n";
      return kExitGeometry;
    }
  } catch (const PatchFileError& e) {
    err << "morsefield: " << e.what() << "\n";
    return kExitInput;
  } catch (const UsageError& e) {
    err << "morsefield: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    // Errors while loading: SPD violations, evaluation outside a function's domain.
    err << "morsefield: " << common.file << ": " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "morsefield: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "morsefield: " << e.what() << "\n";
    return kExitGeometry;
  }

  report["exit_code"] = code;
  if (common.timings) report["timings"] = timer.json();
  const std::string text =
      render_report(report, common.format == "csv" ? ReportFormat::kCsv : ReportFormat::kJson);
  if (common.out.empty()) {
    out << text;
  } else {
    std::ofstream file(common.out, std::ios::binary);
    if (!file || !(file << text)) {
      err << "morsefield: cannot write report to " << common.out << "\n";
      return kExitInput;
    }
  }
  return code;
}

}  // namespace morsefield
