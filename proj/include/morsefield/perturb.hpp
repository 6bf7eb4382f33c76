#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morsefield/curvature.hpp"
#include "morsefield/morse.hpp"
#include "morsefield/patch.hpp"

namespace morsefield {

/// -g^{il} g^{kj} k_lk h_ij - 1/2 g^{ij} d_t k_ij at (x, 0); tangential indices.
double linearized_mean_curvature(const MetricPatch& g0, const SymTensorField& k, std::span<const double> x);
/// Central difference of H(g0 + tau k) at tau = +-step.
double linearized_mean_curvature_oracle(const MetricPatch& g0, const SymTensorField& k, std::span<const double> x,
                                        double step = 1e-5);
/// Max |linearized H| over a boundary grid.
double max_linearized_mean_curvature(const MetricPatch& g0, const SymTensorField& k, int per_axis = 33);

/// Field with only k_11 active whose linearized mean curvature equals `target`.
/// `target` and `c` are read on the boundary (their t-dependence is ignored).
SymTensorField solve_mean_curvature_ode(const MetricPatch& g0, const Field& target, const Field& c);

struct IndexSelection {
  int i = 0;  // 0-based
  int j = 0;
  double value = 0.0;
};
/// Maximizes |sum_k h_ik h_jk - 2 h_ij^2| over pairs i <= j. Any diagonal pair
/// above tol wins over off-diagonal ones. NoIndicesError if nothing exceeds tol.
IndexSelection find_nondegenerate_indices(const Eigen::MatrixXd& h, double tol = 1e-12);

enum class PlanMode { kTangentExplicit, kTangentBasisSolve, kConformal };
const char* to_string(PlanMode mode);

struct PerturbationPlan {
  PlanMode mode = PlanMode::kTangentExplicit;
  int r = 0;  // 0-based target direction
  std::vector<double> p0;
  IndexSelection indices;       // the pair from the pair-value search
  int active_component = -1;    // explicit mode: the diagonal component used
  /// Explicit mode: (G h G h G)_aa - (G h G)_aa^2 / G_aa at p0, G the inverse
  /// induced metric; the linear response of d_s |II|^2 is -2 d_s c(p0) weight.
  double weight = 0.0;
  std::vector<std::string> coefficients;         // printed c_ij / v
  Field coefficient;                              // explicit mode: c(x); conformal mode: v
  std::vector<std::string> integrating_factors;  // printed f_kl
  std::string corrector;                          // basis-solve mode
  std::vector<double> basis_weights;              // basis-solve mode
  double lsq_residual = 0.0;
  std::optional<SymTensorField> tensor;
  std::optional<ConformalFactor> conformal;
  std::optional<ConformalFactor> base;  // u0, conformal mode
  double max_linearized_H = 0.0;        // tangent modes, 33^d boundary grid
};

struct ExplicitEndpoints {
  double k00 = 0.0;                // k(p0, 0)
  double dt = 0.0;                 // d_t k(p0, 0)
  Eigen::VectorXd ds;              // d_s k(p0, 0)
  Eigen::VectorXd dst;             // d_s d_t k(p0, 0)
  Eigen::VectorXd expected_ds;     // d_s c(p0)
  Eigen::VectorXd expected_dst;    // -f(p0, 0) d_s c(p0)
  double max_error() const;
};
ExplicitEndpoints explicit_endpoints(const MetricPatch& g0, const PerturbationPlan& plan);

struct TangentOptions {
  double weight_tol = 1e-8;
  double residual_tol = 1e-6;
};
PerturbationPlan build_tangent_perturbation(const MetricPatch& g0, std::span<const double> p0, int r,
                                            const TangentOptions& options = {});

/// Richardson-extrapolated central difference in tau of grad |II|^2 on g0 + tau k
/// at p0.
Eigen::VectorXd directional_derivative_of_gradient(const MetricPatch& g0, const SymTensorField& k,
                                                   std::span<const double> p0, double step = 1e-4);
/// The exact first variation of grad |II|^2 at p0, evaluated from jets of g0
/// and k (normal gauge).
Eigen::VectorXd analytic_gradient_variation(const MetricPatch& g0, const SymTensorField& k,
                                            std::span<const double> p0);
/// -2 d_s c(p0) * weight, explicit plans only.
Eigen::VectorXd explicit_closed_form(const MetricPatch& g0, const PerturbationPlan& plan);

struct DirectionalReport {
  Eigen::VectorXd oracle;
  Eigen::VectorXd analytic;
  std::optional<Eigen::VectorXd> closed_form;
};
DirectionalReport evaluate_plan(const MetricPatch& g0, const PerturbationPlan& plan);

PerturbationPlan build_conformal_perturbation(const MetricPatch& g, const ConformalFactor& u0,
                                              std::span<const double> p0, int r, double umbilic_tol = 1e-10);
/// Central difference in tau of grad |II|^2 of e^{2(u0 + tau v)} g at p0.
Eigen::VectorXd conformal_directional_derivative(const MetricPatch& g, const ConformalFactor& u0,
                                                 const ConformalFactor& v, std::span<const double> p0,
                                                 double step = 1e-4);
/// -2 e^{-2 u0(p0)} |II(p0)|^2 d_s v(p0)
Eigen::VectorXd conformal_closed_form(const MetricPatch& g, const ConformalFactor& u0, const ConformalFactor& v,
                                      std::span<const double> p0);

enum class MorsifyMode { kTangent, kConformal };

struct MorsifyRound {
  std::vector<double> p0;
  double epsilon = 0.0;
  std::vector<double> coefficients;  // random weights of the generators, in [-1, 1]
  bool morse_after = false;
  double min_abs_eigenvalue = 0.0;
};

struct MorsifyOptions {
  double epsilon = 1e-2;
  int max_rounds = 3;
  std::uint64_t seed = 20240611;
  CensusOptions census;
};

struct MorsifyResult {
  MetricPatch patch;
  Census before;
  Census after;
  bool success = false;
  int rounds = 0;
  std::vector<MorsifyRound> log;
  double achieved_max_H = 0.0;
  /// Tangent mode: 10 * sum_i eps_i * C_i with C_i the C^2 norm of the unscaled
  /// direction. Conformal mode: 0.
  double H_bound = 0.0;
  std::optional<ConformalFactor> conformal_total;
  std::optional<SymTensorField> tensor_total;
};

MorsifyResult morsify(const MetricPatch& g, MorsifyMode mode, const MorsifyOptions& options = {});

/// Quadratic generators centred at p0: one per pair r <= s, each normalized so
/// the linear response of the Hessian of |II|^2 at p0 is sym(e_r e_s).
std::vector<SymTensorField> tangent_quadratic_generators(const MetricPatch& g, std::span<const double> p0);
std::vector<ConformalFactor> conformal_quadratic_generators(const MetricPatch& g, const ConformalFactor& u0,
                                                             std::span<const double> p0);

/// k = A + t B with B = -(2/d) <A, h>_gamma gamma, which makes the linearized
/// mean curvature vanish identically on a minimal normal-gauge patch. A is
/// given by tangential components depending on x only.
SymTensorField trace_corrected(const MetricPatch& g0, const std::vector<Expression>& tangential_packed);

}  // namespace morsefield
