#pragma once

// JSON report pieces. Reports use ordered_json so key order is fixed by
// construction and output is byte-stable for identical inputs.

#include <Eigen/Dense>
#include <string>
#include <string_view>

#include <json.hpp>

#include "morsefield/curvature.hpp"
#include "morsefield/fermi.hpp"
#include "morsefield/morse.hpp"
#include "morsefield/perturb.hpp"

namespace morsefield {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchema = 1;
inline constexpr char kToolName[] = "morsefield";
inline constexpr char kToolVersion[] = "0.3.0";

/// FNV-1a 64-bit, lowercase hex, 16 digits.
std::string fnv1a64_hex(std::string_view bytes);

Json vector_json(const Eigen::VectorXd& v);
Json matrix_json(const Eigen::MatrixXd& m);  // row-major nested arrays
/// Non-finite values become null.
Json number_json(double v);

Json critical_point_json(const CriticalPointReport& p);
Json census_json(const Census& c);
Json minimality_json(const MinimalityReport& m);
Json plan_json(const PerturbationPlan& plan);
Json directional_json(const DirectionalReport& r);
Json morsify_json(const MorsifyResult& r);
Json fermi_residuals_json(const FermiResiduals& r);
Json integrator_json(const IntegratorStats& s);

enum class ReportFormat { kJson, kCsv };

/// JSON: two-space indent plus trailing newline. CSV: "key,value" rows with
/// dotted paths and [i] for array elements.
std::string render_report(const Json& report, ReportFormat format);

}  // namespace morsefield
