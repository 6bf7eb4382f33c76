#include "morsefield/report.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

namespace morsefield {

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json number_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_json(v(i)));
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

Json critical_point_json(const CriticalPointReport& p) {
  Json j;
  j["x"] = vector_json(p.x);
  j["gradient_norm"] = number_json(p.gradient_norm);
  j["hessian"] = matrix_json(p.hessian);
  j["eigenvalues"] = vector_json(p.eigenvalues);
  j["classification"] = p.classification == Classification::kNondegenerate ? "nondegenerate" : "degenerate";
  j["index"] = p.index;
  j["near_degenerate"] = p.near_degenerate;
  return j;
}

Json census_json(const Census& c) {
  Json j;
  j["region_radius"] = number_json(c.region_radius);
  j["flat_function"] = c.flat;
  j["count"] = c.points.size();
  j["all_nondegenerate"] = c.all_nondegenerate();
  j["min_abs_eigenvalue"] = number_json(c.min_abs_eigenvalue());
  j["seeds"] = c.seeds.size();
  j["non_converged_seeds"] = c.non_converged;
  Json pts = Json::array();
  for (const auto& p : c.points) pts.push_back(critical_point_json(p));
  j["points"] = std::move(pts);
  return j;
}

Json minimality_json(const MinimalityReport& m) {
  Json j;
  j["is_minimal"] = m.is_minimal;
  j["max_abs_H"] = number_json(m.max_abs_H);
  j["min_sff_norm_sq"] = number_json(m.min_sff_norm_sq);
  j["nowhere_umbilic"] = m.nowhere_umbilic;
  return j;
}

Json plan_json(const PerturbationPlan& plan) {
  Json j;
  j["mode"] = to_string(plan.mode);
  j["target"] = plan.r + 1;
  j["p0"] = plan.p0;
  if (plan.mode != PlanMode::kConformal) {
    j["indices"] = {plan.indices.i + 1, plan.indices.j + 1};
    j["pair_value"] = number_json(plan.indices.value);
  }
  if (plan.mode == PlanMode::kTangentExplicit) {
    j["active_component"] = {plan.active_component + 1, plan.active_component + 1};
    j["weight"] = number_json(plan.weight);
  }
  j["coefficients"] = plan.coefficients;
  if (!plan.integrating_factors.empty()) j["integrating_factors"] = plan.integrating_factors;
  if (plan.mode == PlanMode::kTangentBasisSolve) {
    j["corrector"] = plan.corrector;
    j["basis_weights"] = plan.basis_weights;
    j["lsq_residual"] = number_json(plan.lsq_residual);
  }
  if (plan.mode != PlanMode::kConformal) j["max_linearized_H"] = number_json(plan.max_linearized_H);
  return j;
}

Json directional_json(const DirectionalReport& r) {
  Json j;
  j["oracle"] = vector_json(r.oracle);
  j["analytic"] = vector_json(r.analytic);
  j["closed_form"] = r.closed_form ? vector_json(*r.closed_form) : Json(nullptr);
  return j;
}

Json morsify_json(const MorsifyResult& r) {
  Json j;
  j["success"] = r.success;
  j["rounds"] = r.rounds;
  Json log = Json::array();
  for (const auto& round : r.log) {
    Json e;
    e["p0"] = round.p0;
    e["epsilon"] = number_json(round.epsilon);
    e["coefficients"] = round.coefficients;
    e["morse_after"] = round.morse_after;
    e["min_abs_eigenvalue"] = number_json(round.min_abs_eigenvalue);
    log.push_back(std::move(e));
  }
  j["log"] = std::move(log);
  j["achieved_max_abs_H"] = number_json(r.achieved_max_H);
  j["H_bound"] = number_json(r.H_bound);
  j["before"] = census_json(r.before);
  j["after"] = census_json(r.after);
  return j;
}

Json fermi_residuals_json(const FermiResiduals& r) {
  Json j;
  j["identity"] = number_json(r.identity);
  j["first_derivatives"] = number_json(r.first_derivatives);
  j["mixed_boundary"] = number_json(r.mixed_boundary);
  j["normal_boundary"] = number_json(r.normal_boundary);
  j["mixed_collar"] = number_json(r.mixed_collar);
  j["normal_collar"] = number_json(r.normal_collar);
  j["max"] = number_json(r.max());
  return j;
}

Json integrator_json(const IntegratorStats& s) {
  Json j;
  j["method"] = "rk4";
  j["boundary_steps"] = s.boundary_steps;
  j["normal_steps"] = s.normal_steps;
  j["boundary_error_estimate"] = number_json(s.boundary_error_estimate);
  j["normal_error_estimate"] = number_json(s.normal_error_estimate);
  j["geodesics"] = s.geodesics;
  return j;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void flatten(const Json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    return;
  }
  if (j.is_array()) {
    if (j.empty()) out += csv_field(prefix) + ",[]\n";
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    return;
  }
  const std::string value = j.is_string() ? j.get<std::string>() : j.dump();
  out += csv_field(prefix) + "," + csv_field(value) + "\n";
}

}  // namespace

std::string render_report(const Json& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return report.dump(2) + "\n";
  std::string out = "key,value\n";
  flatten(report, "", out);
  return out;
}

}  // namespace morsefield
