#include "morsefield/field.hpp"

#include <algorithm>
#include <stdexcept>

namespace morsefield {

double ScalarField::value(std::span<const double> point) const { return jet(point, 0).value(); }

namespace {

class ExpressionField final : public ScalarField {
 public:
  ExpressionField(Expression e, int dim) : e_(std::move(e)), dim_(dim) {
    if (e_.max_var_index() >= dim) throw std::invalid_argument("expression uses more variables than the chart has");
  }
  int dim() const override { return dim_; }
  int max_order() const override { return kJetMaxOrder; }
  Jet jet(std::span<const double> point, int order) const override {
    const auto vars = coordinate_jets(point, order);
    return e_.evaluate(std::span<const Jet>(vars));
  }
  double value(std::span<const double> point) const override { return e_.evaluate(point); }
  const Expression* expression() const override { return &e_; }

 private:
  Expression e_;
  int dim_;
};

class FunctionField final : public ScalarField {
 public:
  FunctionField(int dim, int max_order, JetFunction fn) : dim_(dim), max_order_(max_order), fn_(std::move(fn)) {}
  int dim() const override { return dim_; }
  int max_order() const override { return max_order_; }
  Jet jet(std::span<const double> point, int order) const override {
    if (order > max_order_) throw std::invalid_argument("jet order exceeds field capability");
    return fn_(point, order);
  }

 private:
  int dim_;
  int max_order_;
  JetFunction fn_;
};

void check_dims(const Field& a, const Field& b) {
  if (a->dim() != b->dim()) throw std::invalid_argument("field dimension mismatch");
}

}  // namespace

Field expression_field(Expression e, int dim) { return std::make_shared<ExpressionField>(std::move(e), dim); }

Field constant_field(double c, int dim) { return expression_field(Expression::constant(c), dim); }

Field function_field(int dim, int max_order, JetFunction fn) {
  return std::make_shared<FunctionField>(dim, max_order, std::move(fn));
}

Field sum(const Field& a, const Field& b) {
  check_dims(a, b);
  if (a->expression() && b->expression()) return expression_field(*a->expression() + *b->expression(), a->dim());
  if (is_structurally_constant(b, 0.0)) return a;
  if (is_structurally_constant(a, 0.0)) return b;
  return function_field(a->dim(), std::min(a->max_order(), b->max_order()),
                        [a, b](std::span<const double> p, int order) { return a->jet(p, order) + b->jet(p, order); });
}

Field scaled(double s, const Field& a) {
  if (a->expression()) return expression_field(s * *a->expression(), a->dim());
  if (s == 0.0) return constant_field(0.0, a->dim());
  return function_field(a->dim(), a->max_order(),
                        [a, s](std::span<const double> p, int order) { return a->jet(p, order) * s; });
}

Field product(const Field& a, const Field& b) {
  check_dims(a, b);
  if (a->expression() && b->expression()) return expression_field(*a->expression() * *b->expression(), a->dim());
  if (is_structurally_constant(a, 0.0) || is_structurally_constant(b, 0.0)) return constant_field(0.0, a->dim());
  return function_field(a->dim(), std::min(a->max_order(), b->max_order()),
                        [a, b](std::span<const double> p, int order) { return a->jet(p, order) * b->jet(p, order); });
}

Field exp_scaled(double s, const Field& a) {
  if (a->expression()) return expression_field(exp(s * *a->expression()), a->dim());
  return function_field(a->dim(), a->max_order(),
                        [a, s](std::span<const double> p, int order) { return exp(a->jet(p, order) * s); });
}

bool is_structurally_constant(const Field& f, double c) {
  const Expression* e = f->expression();
  return e && e->is_constant(c);
}

}  // namespace morsefield
