#include "morsefield/expr.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "morsefield/error.hpp"

namespace morsefield {

struct Expression::Node {
  Op op = Op::kConst;
  double value = 0.0;   // kConst
  int index = 0;        // kVar: variable index; kPowInt: exponent
  std::string name;     // kVar
  std::shared_ptr<const Node> a, b;
};

struct ExpressionAccess {
  using Node = Expression::Node;
  static const Node& node(const Expression& e) { return *e.node_; }
  static Expression wrap(std::shared_ptr<const Node> n) { return Expression(std::move(n)); }
  static std::shared_ptr<const Node> ptr(const Expression& e) { return e.node_; }
};

namespace {

using Op = Expression::Op;
using Node = ExpressionAccess::Node;

Expression make_node(Op op, const Expression& a, const Expression* b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = ExpressionAccess::ptr(a);
  if (b) n->b = ExpressionAccess::ptr(*b);
  return ExpressionAccess::wrap(std::move(n));
}

const char* function_name(Op op) {
  switch (op) {
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kSqrt: return "sqrt";
    default: return nullptr;
  }
}

bool is_function(Op op) { return function_name(op) != nullptr; }

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool is_small_integer(double v) {
  return std::isfinite(v) && v == std::floor(v) && std::abs(v) <= 64.0;
}

// ---------------------------------------------------------------------------
// Evaluation

[[noreturn]] void domain(const char* what, const Node& n) {
  throw DomainError(what, ExpressionAccess::wrap(std::shared_ptr<const Node>(&n, [](const Node*) {}))
                              .to_string());
}

double eval_double(const Node& n, std::span<const double> p) {
  switch (n.op) {
    case Op::kConst: return n.value;
    case Op::kVar:
      if (n.index >= static_cast<int>(p.size())) throw std::out_of_range("expression variable index");
      return p[n.index];
    case Op::kNeg: return -eval_double(*n.a, p);
    case Op::kAdd: return eval_double(*n.a, p) + eval_double(*n.b, p);
    case Op::kSub: return eval_double(*n.a, p) - eval_double(*n.b, p);
    case Op::kMul: return eval_double(*n.a, p) * eval_double(*n.b, p);
    case Op::kDiv: {
      const double den = eval_double(*n.b, p);
      if (den == 0.0) domain("division by zero", n);
      return eval_double(*n.a, p) / den;
    }
    case Op::kPowInt: {
      const double base = eval_double(*n.a, p);
      if (base == 0.0 && n.index < 0) domain("division by zero", n);
      return std::pow(base, n.index);
    }
    case Op::kPow: {
      const double base = eval_double(*n.a, p);
      if (base <= 0.0) domain("real power of non-positive base", n);
      return std::pow(base, eval_double(*n.b, p));
    }
    case Op::kExp: {
      const double r = std::exp(eval_double(*n.a, p));
      if (!std::isfinite(r)) domain("overflow", n);
      return r;
    }
    case Op::kLog: {
      const double a = eval_double(*n.a, p);
      if (a <= 0.0) domain("log of non-positive value", n);
      return std::log(a);
    }
    case Op::kSin: return std::sin(eval_double(*n.a, p));
    case Op::kCos: return std::cos(eval_double(*n.a, p));
    case Op::kSqrt: {
      const double a = eval_double(*n.a, p);
      if (a < 0.0) domain("sqrt of negative value", n);
      return std::sqrt(a);
    }
  }
  return 0.0;
}

Jet eval_jet(const Node& n, std::span<const Jet> p) {
  switch (n.op) {
    case Op::kConst: return Jet::constant_like(p[0], n.value);
    case Op::kVar:
      if (n.index >= static_cast<int>(p.size())) throw std::out_of_range("expression variable index");
      return p[n.index];
    case Op::kNeg: return -eval_jet(*n.a, p);
    case Op::kAdd: return eval_jet(*n.a, p) + eval_jet(*n.b, p);
    case Op::kSub: return eval_jet(*n.a, p) - eval_jet(*n.b, p);
    case Op::kMul: {
      // Constant factors are common; skip the full convolution for them.
      if (n.a->op == Op::kConst) return eval_jet(*n.b, p) * n.a->value;
      if (n.b->op == Op::kConst) return eval_jet(*n.a, p) * n.b->value;
      return eval_jet(*n.a, p) * eval_jet(*n.b, p);
    }
    case Op::kDiv: {
      if (n.b->op == Op::kConst) {
        if (n.b->value == 0.0) domain("division by zero", n);
        return eval_jet(*n.a, p) / n.b->value;
      }
      const Jet den = eval_jet(*n.b, p);
      if (den.value() == 0.0) domain("division by zero", n);
      return eval_jet(*n.a, p) * reciprocal(den);
    }
    case Op::kPowInt: {
      const Jet base = eval_jet(*n.a, p);
      if (base.value() == 0.0 && n.index < 0) domain("division by zero", n);
      return pow(base, n.index);
    }
    case Op::kPow: {
      const Jet base = eval_jet(*n.a, p);
      if (base.value() <= 0.0) domain("real power of non-positive base", n);
      if (n.b->op == Op::kConst) return pow(base, n.b->value);
      return exp(eval_jet(*n.b, p) * log(base));
    }
    case Op::kExp: {
      Jet r = exp(eval_jet(*n.a, p));
      if (!std::isfinite(r.value())) domain("overflow", n);
      return r;
    }
    case Op::kLog: {
      const Jet a = eval_jet(*n.a, p);
      if (a.value() <= 0.0) domain("log of non-positive value", n);
      return log(a);
    }
    case Op::kSin: return sin(eval_jet(*n.a, p));
    case Op::kCos: return cos(eval_jet(*n.a, p));
    case Op::kSqrt: {
      const Jet a = eval_jet(*n.a, p);
      if (a.value() < 0.0 || (a.value() == 0.0 && a.order() > 0)) domain("sqrt outside smooth domain", n);
      return sqrt(a);
    }
  }
  return Jet::constant_like(p[0], 0.0);
}

// ---------------------------------------------------------------------------
// Printing

enum Level { kLevelSum = 1, kLevelProduct = 2, kLevelPower = 3, kLevelAtom = 4 };

std::string print(const Node& n);

std::string print_neg(const Node& n) {
  // Operand of a bare unary minus parses at term level.
  const Node& a = *n.a;
  const bool paren = a.op == Op::kAdd || a.op == Op::kSub || a.op == Op::kNeg ||
                     (a.op == Op::kConst && std::signbit(a.value));
  return paren ? "-(" + print(a) + ")" : "-" + print(a);
}

// Print `n` as an operand where a bare minus would be misparsed unless allowed.
std::string operand(const Node& n, bool paren_sums, bool paren_products, bool allow_bare_neg) {
  if (n.op == Op::kNeg) return allow_bare_neg ? print_neg(n) : "(" + print_neg(n) + ")";
  if (n.op == Op::kConst && std::signbit(n.value)) return "(" + format_number(n.value) + ")";
  const bool sum = n.op == Op::kAdd || n.op == Op::kSub;
  const bool product = n.op == Op::kMul || n.op == Op::kDiv;
  if ((sum && paren_sums) || (product && paren_products)) return "(" + print(n) + ")";
  return print(n);
}

bool is_atom(const Node& n) {
  return n.op == Op::kVar || is_function(n.op) || (n.op == Op::kConst && !std::signbit(n.value));
}

std::string print(const Node& n) {
  switch (n.op) {
    case Op::kConst:
      return std::signbit(n.value) ? "(" + format_number(n.value) + ")" : format_number(n.value);
    case Op::kVar: return n.name;
    case Op::kNeg: return print_neg(n);
    case Op::kAdd:
      return operand(*n.a, false, false, true) + " + " + operand(*n.b, true, false, true);
    case Op::kSub:
      return operand(*n.a, false, false, true) + " - " + operand(*n.b, true, false, true);
    case Op::kMul:
      return operand(*n.a, true, false, false) + "*" + operand(*n.b, true, true, false);
    case Op::kDiv:
      return operand(*n.a, true, false, false) + "/" + operand(*n.b, true, true, false);
    case Op::kPowInt: {
      const std::string base = is_atom(*n.a) ? print(*n.a) : "(" + print(*n.a) + ")";
      return base + "^" + (n.index < 0 ? "(" + std::to_string(n.index) + ")" : std::to_string(n.index));
    }
    case Op::kPow: {
      const std::string base = is_atom(*n.a) ? print(*n.a) : "(" + print(*n.a) + ")";
      const Node& e = *n.b;
      const bool bare = is_atom(e) || ((e.op == Op::kPow || e.op == Op::kPowInt) && is_atom(*e.a));
      return base + "^" + (bare ? print(e) : "(" + print(e) + ")");
    }
    default:
      return std::string(function_name(n.op)) + "(" + print(*n.a) + ")";
  }
}

// ---------------------------------------------------------------------------
// Parsing

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> vars) : s_(text), vars_(vars) {}

  Expression parse_all() {
    Expression e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expression expr() {
    Expression left = term();
    while (true) {
      if (accept('+')) {
        left = Expression::raw(Op::kAdd, left, term());
      } else if (accept('-')) {
        left = Expression::raw(Op::kSub, left, term());
      } else {
        return left;
      }
    }
  }

  Expression term() {
    if (accept('-')) return Expression::raw(Op::kNeg, term());
    return product();
  }

  Expression product() {
    Expression left = factor();
    while (true) {
      if (accept('*')) {
        left = Expression::raw(Op::kMul, left, factor());
      } else if (accept('/')) {
        left = Expression::raw(Op::kDiv, left, factor());
      } else {
        return left;
      }
    }
  }

  Expression factor() {
    Expression b = base();
    if (!accept('^')) return b;
    Expression e = factor();
    if (e.is_constant() && is_small_integer(e.constant_value())) {
      return Expression::raw_pow_int(b, static_cast<int>(e.constant_value()));
    }
    if (e.op() == Op::kNeg && e.child(0).is_constant() && is_small_integer(e.child(0).constant_value())) {
      return Expression::raw_pow_int(b, -static_cast<int>(e.child(0).constant_value()));
    }
    return Expression::raw(Op::kPow, b, e);
  }

  Expression base() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expression e = expr();
      expect(')');
      return e;
    }
    if (c == '-') {
      ++pos_;
      return Expression::raw(Op::kNeg, factor());
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  Expression number() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + pos_) throw ParseError("malformed number", start);
    return Expression::constant(v);
  }

  Expression identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    static const std::pair<const char*, Op> functions[] = {
        {"exp", Op::kExp}, {"log", Op::kLog}, {"sin", Op::kSin}, {"cos", Op::kCos}, {"sqrt", Op::kSqrt}};
    for (const auto& [fname, op] : functions) {
      if (name == fname) {
        skip_ws();
        if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
        Expression arg = expr();
        expect(')');
        return Expression::raw(op, arg);
      }
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) return Expression::variable(static_cast<int>(i), name);
    }
    throw UnknownVariableError(name, start);
  }

  std::string_view s_;
  std::span<const std::string> vars_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------

Expression::Expression() : Expression(constant(0.0)) {}

Expression::Expression(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expression Expression::constant(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::kConst;
  n->value = value;
  return Expression(std::move(n));
}

Expression Expression::variable(int index, std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::kVar;
  n->index = index;
  n->name = std::move(name);
  return Expression(std::move(n));
}

Expression Expression::raw(Op op, const Expression& a) { return make_node(op, a); }

Expression Expression::raw(Op op, const Expression& a, const Expression& b) { return make_node(op, a, &b); }

Expression Expression::raw_pow_int(const Expression& base, int exponent) {
  auto n = std::make_shared<Node>();
  n->op = Op::kPowInt;
  n->index = exponent;
  n->a = base.node_;
  return Expression(std::move(n));
}

Expression::Op Expression::op() const { return node_->op; }
double Expression::constant_value() const { return node_->value; }
int Expression::var_index() const { return node_->index; }
const std::string& Expression::var_name() const { return node_->name; }
int Expression::int_exponent() const { return node_->index; }

int Expression::arity() const {
  if (node_->b) return 2;
  if (node_->a) return 1;
  return 0;
}

Expression Expression::child(int i) const { return Expression(i == 0 ? node_->a : node_->b); }

double Expression::evaluate(std::span<const double> point) const { return eval_double(*node_, point); }

Jet Expression::evaluate(std::span<const Jet> point) const {
  if (point.empty()) {
    if (max_var_index() >= 0) throw std::out_of_range("expression variable index");
    throw std::invalid_argument("jet evaluation needs at least one coordinate");
  }
  return eval_jet(*node_, point);
}

Expression Expression::derivative(int var) const {
  const Node& n = *node_;
  auto A = [&] { return child(0); };
  auto B = [&] { return child(1); };
  switch (n.op) {
    case Op::kConst: return constant(0.0);
    case Op::kVar: return constant(n.index == var ? 1.0 : 0.0);
    case Op::kNeg: return -A().derivative(var);
    case Op::kAdd: return A().derivative(var) + B().derivative(var);
    case Op::kSub: return A().derivative(var) - B().derivative(var);
    case Op::kMul: return A().derivative(var) * B() + A() * B().derivative(var);
    case Op::kDiv:
      return A().derivative(var) / B() - A() * B().derivative(var) / pow(B(), 2);
    case Op::kPowInt:
      return constant(n.index) * pow(A(), n.index - 1) * A().derivative(var);
    case Op::kPow:
      return *this * (B().derivative(var) * log(A()) + B() * A().derivative(var) / A());
    case Op::kExp: return *this * A().derivative(var);
    case Op::kLog: return A().derivative(var) / A();
    case Op::kSin: return cos(A()) * A().derivative(var);
    case Op::kCos: return -(sin(A()) * A().derivative(var));
    case Op::kSqrt: return A().derivative(var) / (constant(2.0) * *this);
  }
  return constant(0.0);
}

namespace {

Expression rebuild(const Expression& e, const Expression* a, const Expression* b) {
  switch (e.op()) {
    case Op::kConst:
    case Op::kVar: return e;
    case Op::kNeg: return -*a;
    case Op::kAdd: return *a + *b;
    case Op::kSub: return *a - *b;
    case Op::kMul: return *a * *b;
    case Op::kDiv: return *a / *b;
    case Op::kPowInt: return pow(*a, e.int_exponent());
    case Op::kPow: return pow(*a, *b);
    case Op::kExp: return exp(*a);
    case Op::kLog: return log(*a);
    case Op::kSin: return sin(*a);
    case Op::kCos: return cos(*a);
    case Op::kSqrt: return sqrt(*a);
  }
  return e;
}

template <class Leaf>
Expression transform(const Expression& e, const Leaf& leaf) {
  if (e.arity() == 0) return leaf(e);
  const Expression a = transform(e.child(0), leaf);
  if (e.arity() == 1) return rebuild(e, &a, nullptr);
  const Expression b = transform(e.child(1), leaf);
  return rebuild(e, &a, &b);
}

}  // namespace

Expression Expression::substitute(int var, const Expression& replacement) const {
  return transform(*this, [&](const Expression& leaf) {
    return (leaf.op() == Op::kVar && leaf.var_index() == var) ? replacement : leaf;
  });
}

Expression Expression::folded() const {
  return transform(*this, [](const Expression& leaf) { return leaf; });
}

std::string Expression::to_string() const { return print(*node_); }

bool Expression::structurally_equal(const Expression& other) const {
  const Node& x = *node_;
  const Node& y = *other.node_;
  if (&x == &y) return true;
  if (x.op != y.op) return false;
  switch (x.op) {
    case Op::kConst: return x.value == y.value;
    case Op::kVar: return x.index == y.index;
    case Op::kPowInt:
      if (x.index != y.index) return false;
      break;
    default: break;
  }
  if (arity() != other.arity()) return false;
  for (int i = 0; i < arity(); ++i) {
    if (!child(i).structurally_equal(other.child(i))) return false;
  }
  return true;
}

int Expression::max_var_index() const {
  if (node_->op == Op::kVar) return node_->index;
  int m = -1;
  for (int i = 0; i < arity(); ++i) m = std::max(m, child(i).max_var_index());
  return m;
}

std::size_t Expression::node_count() const {
  std::size_t c = 1;
  for (int i = 0; i < arity(); ++i) c += child(i).node_count();
  return c;
}

// ---------------------------------------------------------------------------
// Folding constructors

namespace {

Expression fold_if_constant(Expression e) {
  for (int i = 0; i < e.arity(); ++i) {
    if (!e.child(i).is_constant()) return e;
  }
  if (e.arity() == 0) return e;
  try {
    const double v = e.evaluate(std::span<const double>());
    if (std::isfinite(v)) return Expression::constant(v);
  } catch (const DomainError&) {
    // keep the unevaluable node; it will raise at evaluation time
  }
  return e;
}

}  // namespace

Expression operator+(const Expression& a, const Expression& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.op() == Op::kNeg) return a - b.child(0);
  return fold_if_constant(Expression::raw(Op::kAdd, a, b));
}

Expression operator-(const Expression& a, const Expression& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return fold_if_constant(Expression::raw(Op::kSub, a, b));
}

Expression operator*(const Expression& a, const Expression& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expression::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return fold_if_constant(Expression::raw(Op::kMul, a, b));
}

Expression operator/(const Expression& a, const Expression& b) {
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expression::constant(0.0);
  return fold_if_constant(Expression::raw(Op::kDiv, a, b));
}

Expression operator-(const Expression& a) {
  if (a.is_constant()) return Expression::constant(-a.constant_value());
  if (a.op() == Op::kNeg) return a.child(0);
  return Expression::raw(Op::kNeg, a);
}

Expression operator+(const Expression& a, double b) { return a + Expression::constant(b); }
Expression operator*(double a, const Expression& b) { return Expression::constant(a) * b; }

Expression exp(const Expression& a) { return fold_if_constant(Expression::raw(Op::kExp, a)); }
Expression log(const Expression& a) { return fold_if_constant(Expression::raw(Op::kLog, a)); }
Expression sin(const Expression& a) { return fold_if_constant(Expression::raw(Op::kSin, a)); }
Expression cos(const Expression& a) { return fold_if_constant(Expression::raw(Op::kCos, a)); }
Expression sqrt(const Expression& a) { return fold_if_constant(Expression::raw(Op::kSqrt, a)); }

Expression pow(const Expression& a, int exponent) {
  if (exponent == 0) return Expression::constant(1.0);
  if (exponent == 1) return a;
  return fold_if_constant(Expression::raw_pow_int(a, exponent));
}

Expression pow(const Expression& a, const Expression& exponent) {
  if (exponent.is_constant() && is_small_integer(exponent.constant_value())) {
    return pow(a, static_cast<int>(exponent.constant_value()));
  }
  return fold_if_constant(Expression::raw(Op::kPow, a, exponent));
}

Expression parse(std::string_view text, std::span<const std::string> vars) {
  return Parser(text, vars).parse_all();
}

std::vector<std::string> chart_variables(int n) {
  std::vector<std::string> v;
  for (int i = 1; i < n; ++i) v.push_back("x" + std::to_string(i));
  v.push_back("t");
  return v;
}

}  // namespace morsefield
