#pragma once

// Arithmetic expressions over the chart coordinates with exact symbolic
// differentiation. Trees are immutable and shared; evaluation is pure.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morsefield/jet.hpp"

namespace morsefield {

class Expression {
 public:
  enum class Op {
    kConst, kVar, kNeg, kAdd, kSub, kMul, kDiv, kPowInt, kPow,
    kExp, kLog, kSin, kCos, kSqrt
  };

  /// The constant 0.
  Expression();

  static Expression constant(double value);
  static Expression variable(int index, std::string name);

  /// Builds a node exactly as given (no folding). Used by the parser so that
  /// parse/print round trips are structural.
  static Expression raw(Op op, const Expression& a);
  static Expression raw(Op op, const Expression& a, const Expression& b);
  static Expression raw_pow_int(const Expression& base, int exponent);

  Op op() const;
  double constant_value() const;
  int var_index() const;
  const std::string& var_name() const;
  int int_exponent() const;
  /// Number of child expressions (0, 1 or 2).
  int arity() const;
  Expression child(int i) const;

  bool is_constant() const { return op() == Op::kConst; }
  bool is_constant(double v) const { return is_constant() && constant_value() == v; }

  double evaluate(std::span<const double> point) const;
  Jet evaluate(std::span<const Jet> point) const;

  Expression derivative(int var) const;
  Expression substitute(int var, const Expression& replacement) const;
  /// Light constant folding (x*1, x+0, constant subtrees).
  Expression folded() const;

  std::string to_string() const;
  bool structurally_equal(const Expression& other) const;
  /// Largest variable index used, or -1 for constant expressions.
  int max_var_index() const;
  std::size_t node_count() const;

 private:
  struct Node;
  explicit Expression(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;

  friend struct ExpressionAccess;
};

// Folding constructors.
Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);
Expression operator-(const Expression& a);
Expression operator+(const Expression& a, double b);
Expression operator*(double a, const Expression& b);
Expression exp(const Expression& a);
Expression log(const Expression& a);
Expression sin(const Expression& a);
Expression cos(const Expression& a);
Expression sqrt(const Expression& a);
Expression pow(const Expression& a, int exponent);
Expression pow(const Expression& a, const Expression& exponent);

/// Parses `text` with the given variable names (index = position in `vars`).
/// Grammar: expr := term (('+'|'-') term)*; term := '-' term | product;
/// product := factor (('*'|'/') factor)*; factor := base ('^' factor)?;
/// base := number | ident | func '(' expr ')' | '(' expr ')' | '-' factor.
Expression parse(std::string_view text, std::span<const std::string> vars);

/// x1..x_{n-1}, t for an n-dimensional chart.
std::vector<std::string> chart_variables(int n);

}  // namespace morsefield
