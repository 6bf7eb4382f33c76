#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "morsefield/field.hpp"
#include "morsefield/jet_matrix.hpp"
#include "morsefield/parallel.hpp"
#include "morsefield/patch.hpp"

namespace morsefield {

/// kNormalGauge uses h = -1/2 d_t g and needs a normal-gauge patch. kGeneral uses the
/// Christoffel symbols and the unit normal, valid in any boundary-adapted chart.
/// kAuto picks kNormalGauge when the patch is in normal gauge.
enum class SffRoute { kAuto, kNormalGauge, kGeneral };

struct SecondFundamentalForm {
  std::vector<double> point;  // (x, t)
  Eigen::MatrixXd h;          // d x d
  Eigen::MatrixXd gamma;      // induced metric on the slice, d x d
};

/// Jets (in all n chart variables) of h_ij and of the inverse induced metric at
/// (x, t), of order `order`. Needs order + 1 <= patch max order.
struct SliceGeometry {
  JetMatrix h;
  JetMatrix gamma;
  JetMatrix gamma_inv;
};
SliceGeometry slice_geometry(const MetricPatch& g, std::span<const double> x, double t, int order,
                             SffRoute route = SffRoute::kAuto);

SecondFundamentalForm second_fundamental_form(const MetricPatch& g, std::span<const double> x, double t,
                                              SffRoute route = SffRoute::kAuto);
/// Unnormalized trace g^{ij} h_ij.
double mean_curvature(const MetricPatch& g, std::span<const double> x, double t, SffRoute route = SffRoute::kAuto);
double sff_norm_sq(const MetricPatch& g, std::span<const double> x, double t, SffRoute route = SffRoute::kAuto);

Jet mean_curvature_jet(const MetricPatch& g, std::span<const double> x, double t, int order,
                       SffRoute route = SffRoute::kAuto);
Jet sff_norm_sq_jet(const MetricPatch& g, std::span<const double> x, double t, int order,
                    SffRoute route = SffRoute::kAuto);

/// Boundary points x (|x| <= R) on a regular per-axis grid masked to the ball.
std::vector<std::vector<double>> boundary_grid(int d, double R, int per_axis);

struct MinimalityReport {
  bool is_minimal = false;
  double max_abs_H = 0.0;
  double min_sff_norm_sq = 0.0;
  bool nowhere_umbilic = false;
};
MinimalityReport minimality_report(const MetricPatch& g, double tol, int per_axis = 33,
                                   Execution exec = Execution::kSerial);

struct ConformalFactor {
  Field u;

  /// du/dnu at (x, 0), nu the outward unit normal of g (-d_t in normal gauge).
  double normal_derivative(const MetricPatch& g, std::span<const double> x) const;
  /// max over the boundary grid of |du/dnu| <= tol.
  bool in_theta(const MetricPatch& g, double tol = 1e-10, int per_axis = 33) const;
};

/// u = b + t w with w(x) = -g^{it} d_i b / g^{tt} at (x, 0), so du/dnu = 0.
ConformalFactor theta_lift(const MetricPatch& g, const Field& b);

/// e^{2u} g, componentwise.
MetricPatch conformal_metric(const MetricPatch& g, const ConformalFactor& u);

/// Mean curvature of e^{2u} g from the base data:
/// e^{-u} (H_base + d * du/dnu), d the boundary dimension.
double conformal_mean_curvature(double H_base, double u_value, double du_dnu, int boundary_dim);

/// Residual of |II_{e^{2u}g}|^2 = e^{-2u}|II_g|^2 over the boundary grid as
/// max |a - b| / max(max |b|, 1e-8). ThetaViolationError if u is not in Theta.
double verify_conformal_norm_law(const MetricPatch& g, const ConformalFactor& u, int per_axis = 17);

}  // namespace morsefield
