#pragma once

// Normal-gauge charts from a general boundary-adapted chart: geodesic normal
// coordinates on the boundary slice, then arclength along the inward normal
// geodesics. Jacobians come from the geodesic variational equations.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "morsefield/grid.hpp"
#include "morsefield/parallel.hpp"
#include "morsefield/patch.hpp"

namespace morsefield {

class BoundaryNormalMap {
 public:
  struct Image {
    Eigen::VectorXd y;         // source boundary coordinates
    Eigen::MatrixXd jacobian;  // dy/dx
  };

  /// steps = 0 picks the step count by step doubling against `tolerance`,
  /// piloted at the corners of the cube of half-width `reach`.
  BoundaryNormalMap(const MetricPatch& g, std::span<const double> center, double reach, double tolerance = 1e-10,
                    int steps = 0);

  Image map(std::span<const double> x) const;
  /// J^T gamma(y(x)) J, the boundary metric in the new coordinates.
  Eigen::MatrixXd induced_metric(std::span<const double> x) const;

  const Eigen::MatrixXd& frame() const { return frame_; }
  int steps() const { return steps_; }
  double error_estimate() const { return error_; }

 private:
  MetricPatch g_;
  Eigen::VectorXd center_;
  Eigen::MatrixXd frame_;  // columns orthonormal for gamma(center)
  int steps_ = 0;
  double error_ = 0.0;
};

BoundaryNormalMap boundary_normal_coordinates(const MetricPatch& g, std::span<const double> pbar,
                                              double reach = 0.5);

struct FermiResiduals {
  double identity = 0.0;          // (i)   max |g_ij(0,0) - delta_ij|
  double first_derivatives = 0.0; // (ii)  max |d_s g_ij(0,0)|
  double mixed_boundary = 0.0;    // (iii) max |g_in(x,0)|
  double normal_boundary = 0.0;   // (iv)  max |g_nn(x,0) - 1|
  double mixed_collar = 0.0;      // (iii) over the whole collar
  double normal_collar = 0.0;     // (iv)  over the whole collar
  double max() const;
};

FermiResiduals validate_fermi(const MetricPatch& patch, int per_axis = 17);

struct FermiOptions {
  double radius = 0.5;
  double depth = 0.2;
  int cells_x = 64;
  int cells_t = 32;
  double tolerance = 1e-10;
  double gauge_tolerance = 1e-8;
  /// 0 = chosen by step doubling.
  int boundary_steps = 0;
  int normal_steps_per_cell = 0;
  Execution exec = Execution::kParallel;
};

struct IntegratorStats {
  int boundary_steps = 0;
  int normal_steps = 0;  // over the full depth
  double boundary_error_estimate = 0.0;
  double normal_error_estimate = 0.0;
  std::size_t geodesics = 0;
};

struct FermiChartResult {
  MetricPatch patch;
  std::vector<double> center;
  FermiResiduals residuals;  // of the raw samples, before the gauge is snapped
  IntegratorStats stats;
  bool normal_gauge = false;
  GridFile grid;
};

/// ChartRadiusError if a geodesic leaves the source chart, FocalPointError if
/// the normal exponential map degenerates, IntegratorError if no step count
/// meets the tolerance.
FermiChartResult fermi_chart(const MetricPatch& g, std::span<const double> pbar, const FermiOptions& options = {});

}  // namespace morsefield
