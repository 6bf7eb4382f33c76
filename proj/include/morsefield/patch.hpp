#pragma once

// Boundary-collar charts B_R(0) x [0, T]. Coordinates are (x1..x_d, t) with
// t = coordinate n-1 (0-based); the boundary is the slice t = 0.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morsefield/field.hpp"

namespace morsefield {

inline int packed_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}
inline int packed_size(int n) { return n * (n + 1) / 2; }

/// Symmetric array of component fields. Storage is packed upper-triangular, so
/// (i, j) and (j, i) are the same object.
class SymmetricComponents {
 public:
  SymmetricComponents() = default;
  SymmetricComponents(int n, std::vector<Field> packed);

  int n() const { return n_; }
  const Field& operator()(int i, int j) const { return packed_[packed_index(n_, i, j)]; }
  const std::vector<Field>& packed() const { return packed_; }

  Eigen::MatrixXd values(std::span<const double> point) const;
  /// Jets of every component, packed.
  std::vector<Jet> jets(std::span<const double> point, int order) const;
  int max_order() const;
  bool symbolic() const;

 private:
  int n_ = 0;
  std::vector<Field> packed_;
};

struct ChartDomain {
  int n = 3;
  double R = 1.0;
  double T = 1.0;

  int d() const { return n - 1; }
  /// Validation grid: 17 points per tangential axis (masked to the ball) times 9 in t.
  std::vector<std::vector<double>> validation_points(int per_axis = 17, int t_points = 9) const;
};

class MetricPatch {
 public:
  MetricPatch() = default;
  /// Throws SpdViolationError if the metric is not positive definite on the
  /// validation grid. The normal-gauge flag is recomputed here.
  MetricPatch(ChartDomain domain, SymmetricComponents g, std::string name = {});
  /// Skips the validation grid; the caller vouches for SPD and the gauge flag.
  static MetricPatch unchecked(ChartDomain domain, SymmetricComponents g, std::string name, bool normal_gauge);

  const ChartDomain& domain() const { return domain_; }
  int n() const { return domain_.n; }
  int d() const { return domain_.d(); }
  double R() const { return domain_.R; }
  double T() const { return domain_.T; }
  const std::string& name() const { return name_; }

  const SymmetricComponents& components() const { return g_; }
  const Field& component(int i, int j) const { return g_(i, j); }
  bool normal_gauge() const { return normal_gauge_; }
  bool symbolic() const { return g_.symbolic(); }
  int max_order() const { return g_.max_order(); }

  Eigen::MatrixXd metric(std::span<const double> point) const { return g_.values(point); }
  std::vector<Jet> metric_jets(std::span<const double> point, int order) const { return g_.jets(point, order); }

 private:
  ChartDomain domain_;
  SymmetricComponents g_;
  std::string name_;
  bool normal_gauge_ = false;
};

class SymTensorField {
 public:
  SymTensorField() = default;
  explicit SymTensorField(SymmetricComponents k, std::optional<double> cutoff_radius = std::nullopt);
  static SymTensorField zero(int n);

  int n() const { return k_.n(); }
  const SymmetricComponents& components() const { return k_; }
  const Field& component(int i, int j) const { return k_(i, j); }
  std::optional<double> cutoff_radius() const { return cutoff_; }

  /// Multiplies by the C^3 bump (1 - |x|^2/rho^2)^4 supported in |x| < rho.
  SymTensorField with_cutoff(double rho) const;
  SymTensorField scaled(double s) const;
  SymTensorField operator+(const SymTensorField& other) const;
  Eigen::MatrixXd values(std::span<const double> point) const { return k_.values(point); }

 private:
  SymmetricComponents k_;
  std::optional<double> cutoff_;
};

/// g + tau * k. With validate = false the validation grid is skipped and the
/// gauge flag is inherited; perturbed_at checks positivity at one point only.
MetricPatch perturbed(const MetricPatch& g, const SymTensorField& k, double tau, bool validate = true);
MetricPatch perturbed_at(const MetricPatch& g, const SymTensorField& k, double tau, std::span<const double> check_at);

/// Gaussian elimination with partial pivoting; SingularMatrixError if a pivot
/// falls below 1e-14.
Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a);

Eigen::MatrixXd inverse_metric(const MetricPatch& g, std::span<const double> point);

struct NeumannResult {
  Eigen::MatrixXd inverse;
  double spectral_radius = 0.0;
  bool divergent = false;
};
/// sum_{l=0..order} (-tau)^l (g0^{-1} k)^l g0^{-1}
NeumannResult neumann_inverse(const Eigen::MatrixXd& g0, const Eigen::MatrixXd& k, double tau, int order);

/// d/dx_s of the inverse metric, -g^{ia} g^{jb} d_s g_ab. `s` is a 0-based
/// coordinate index (s = n-1 is t).
Eigen::MatrixXd derivative_of_inverse(const MetricPatch& g, std::span<const double> point, int s);

/// gamma[k](i, j) = Gamma^k_ij.
std::vector<Eigen::MatrixXd> christoffel(const MetricPatch& g, std::span<const double> point);

struct TensorNormReport {
  int m = 0;
  double value = 0.0;
};
/// Sum over |alpha| <= m and all (i, j) of the sampled sup of |d^alpha k_ij|.
/// Samples the cube [-R, R]^d x [0, T] at `resolution` points per axis, masked to
/// the ball.
TensorNormReport cm_norm(const SymTensorField& k, const ChartDomain& domain, int m, int resolution = 33);

}  // namespace morsefield
