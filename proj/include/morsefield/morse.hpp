#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "morsefield/parallel.hpp"
#include "morsefield/patch.hpp"

namespace morsefield {

/// Gradient of x -> |II|^2(x, 0) in the tangential coordinates.
Eigen::VectorXd grad_sff_norm(const MetricPatch& g, std::span<const double> x);
/// Exact from jets when the backend supports third derivatives; otherwise a
/// fourth-order central difference of the gradient.
Eigen::MatrixXd hessian_sff_norm(const MetricPatch& g, std::span<const double> x);

struct CensusOptions {
  double region_radius = 0.0;  // <= 0 means the chart radius
  double tol_grad = 1e-8;
  double tol_degen = 1e-6;
  int seeds_per_axis = 8;
  int max_iterations = 50;
  double dedup_radius = 1e-6;
  Execution exec = Execution::kSerial;
};

enum class Classification { kNondegenerate, kDegenerate };

struct CriticalPointReport {
  Eigen::VectorXd x;
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;
  Eigen::MatrixXd hessian;
  Eigen::VectorXd eigenvalues;  // ascending
  Classification classification = Classification::kDegenerate;
  int index = 0;  // number of negative eigenvalues
  bool near_degenerate = false;
  double tol_grad = 0.0;
  double tol_degen = 0.0;
};

struct SeedOutcome {
  Eigen::VectorXd seed;
  bool converged = false;
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

struct Census {
  std::vector<CriticalPointReport> points;  // sorted lexicographically by x
  bool flat = false;
  double region_radius = 0.0;
  std::vector<SeedOutcome> seeds;
  int non_converged = 0;

  bool all_nondegenerate() const;
  double min_abs_eigenvalue() const;
};

/// Newton from a grid of cell-centred seeds over [-r, r]^d (masked to the ball).
Census find_critical_points(const MetricPatch& g, const CensusOptions& options = {});

/// Seeds in a caller-chosen order; the census does not depend on it.
Census find_critical_points_from(const MetricPatch& g, const std::vector<Eigen::VectorXd>& seeds,
                                 const CensusOptions& options);
std::vector<Eigen::VectorXd> census_seeds(int d, double radius, int per_axis);

struct MorseVerdict {
  bool is_morse = false;
  Census census;
};
MorseVerdict is_morse(const MetricPatch& g, const CensusOptions& options = {});

struct ContinuationStep {
  double tau = 0.0;
  int count = 0;
  bool preserved = false;
  double drift = 0.0;  // max distance from the base critical points
};
struct ContinuationReport {
  std::vector<ContinuationStep> steps;
  double largest_preserved_tau = 0.0;
  bool persisted_to_max = false;
  double max_drift = 0.0;
};

/// Re-runs the census on g + tau k for tau = tau_max * i / steps, i = 1..steps.
ContinuationReport continuation_experiment(const MetricPatch& g, const SymTensorField& k, double tau_max, int steps,
                                           const CensusOptions& options = {});

}  // namespace morsefield
