#pragma once

// Truncated multivariate Taylor polynomials ("jets") for exact forward-mode
// derivatives of the geometric quantities. Coefficients are Taylor-normalized:
// coeff(alpha) = d^alpha f / alpha!.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace morsefield {

inline constexpr int kJetMaxVars = 4;
inline constexpr int kJetMaxOrder = 4;
inline constexpr int kJetMaxCoeffs = 70;  // C(kJetMaxVars + kJetMaxOrder, kJetMaxOrder)

using Exponent = std::array<std::uint8_t, kJetMaxVars>;

/// Graded monomial enumeration for a fixed variable count. Order-k jets use the
/// first `size(k)` monomials, so truncation is a prefix operation.
class MonomialTable {
 public:
  static const MonomialTable& get(int nvars);

  int nvars() const { return nvars_; }
  int size(int order) const { return sizes_[order]; }
  const Exponent& exponent(int idx) const { return exponents_[idx]; }
  int degree(int idx) const { return degrees_[idx]; }
  /// Index of a monomial, or -1 if its degree exceeds kJetMaxOrder.
  int index_of(const Exponent& e) const;

  struct Product {
    std::uint16_t lhs, rhs, out;
  };
  /// Products needed by an order-k multiplication are the first `product_count(k)`.
  std::span<const Product> products(int order) const {
    return {products_.data(), static_cast<std::size_t>(product_counts_[order])};
  }
  /// For d/dx_var: (source index, target index, factor) triples.
  struct Shift {
    std::uint16_t from, to;
    double factor;
  };
  std::span<const Shift> derivative_shifts(int var) const { return shifts_[var]; }

 private:
  explicit MonomialTable(int nvars);

  int nvars_;
  std::array<int, kJetMaxOrder + 1> sizes_{};
  std::vector<Exponent> exponents_;
  std::vector<int> degrees_;
  std::vector<Product> products_;
  std::array<int, kJetMaxOrder + 1> product_counts_{};
  std::array<std::vector<Shift>, kJetMaxVars> shifts_;
};

class Jet {
 public:
  Jet() { c_[0] = 0.0; }
  Jet(int nvars, int order, double value = 0.0);

  static Jet variable(int nvars, int order, int var, double value);
  /// Constant with the same shape as `like`.
  static Jet constant_like(const Jet& like, double value);

  Jet(const Jet& other);
  Jet& operator=(const Jet& other);

  int nvars() const { return table_->nvars(); }
  int order() const { return order_; }
  int size() const { return size_; }

  double value() const { return c_[0]; }
  double coeff(int idx) const { return c_[idx]; }
  double& coeff(int idx) { return c_[idx]; }
  double coeff(const Exponent& e) const;
  /// Partial derivative d^alpha f at the expansion point.
  double partial(const Exponent& e) const;
  double partial(int var) const;
  double partial(int var_a, int var_b) const;

  const MonomialTable& table() const { return *table_; }

  /// d/dx_var, one order lower (an order-0 jet differentiates to an order-0 zero).
  Jet derivative(int var) const;
  Jet truncated(int order) const;
  /// Drops every monomial that contains `var` (restriction to x_var = base value).
  Jet without_var(int var) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);

  /// f(u) = sum_m taylor[m] (u - u0)^m, with taylor[m] = f^(m)(u0)/m!.
  Jet compose(std::span<const double> taylor) const;

 private:
  const MonomialTable* table_ = nullptr;
  int order_ = 0;
  int size_ = 0;
  std::array<double, kJetMaxCoeffs> c_;  // only the first size_ entries are live
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);
Jet operator-(const Jet& a);

// Elementary functions. Domain checks are the caller's job; these only
// require the value to be inside the function's smooth domain.
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet sqrt(const Jet& a);
Jet reciprocal(const Jet& a);
Jet pow(const Jet& a, double p);
Jet pow(const Jet& a, int p);

/// Jets of the coordinate variables at `point`: x_i = point_i + dx_i.
std::vector<Jet> coordinate_jets(std::span<const double> point, int order);

}  // namespace morsefield
