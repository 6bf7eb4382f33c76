#pragma once

// Scalar fields over the chart (x1..x_d, t). Every backend answers with jets,
// so derivatives of downstream quantities come out of jet arithmetic.

#include <functional>
#include <memory>
#include <span>

#include "morsefield/expr.hpp"
#include "morsefield/jet.hpp"

namespace morsefield {

class ScalarField {
 public:
  virtual ~ScalarField() = default;

  /// Number of chart variables (n).
  virtual int dim() const = 0;
  /// Highest derivative order the backend supports.
  virtual int max_order() const = 0;
  virtual Jet jet(std::span<const double> point, int order) const = 0;
  virtual double value(std::span<const double> point) const;
  /// Symbolic form, when the backend has one.
  virtual const Expression* expression() const { return nullptr; }
};

using Field = std::shared_ptr<const ScalarField>;
using JetFunction = std::function<Jet(std::span<const double>, int)>;

Field expression_field(Expression e, int dim);
Field constant_field(double c, int dim);
Field function_field(int dim, int max_order, JetFunction fn);

// Combinators stay symbolic when every operand is symbolic.
Field sum(const Field& a, const Field& b);
Field scaled(double s, const Field& a);
Field product(const Field& a, const Field& b);
/// exp(s * a)
Field exp_scaled(double s, const Field& a);

bool is_structurally_constant(const Field& f, double c);

}  // namespace morsefield
