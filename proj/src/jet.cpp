#include "morsefield/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace morsefield {

namespace {

void enumerate_degree(int nvars, int var, int remaining, Exponent& current,
                      std::vector<Exponent>& out) {
  if (var == nvars - 1) {
    current[var] = static_cast<std::uint8_t>(remaining);
    out.push_back(current);
    current[var] = 0;
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = static_cast<std::uint8_t>(e);
    enumerate_degree(nvars, var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

MonomialTable::MonomialTable(int nvars) : nvars_(nvars) {
  for (int deg = 0; deg <= kJetMaxOrder; ++deg) {
    Exponent current{};
    enumerate_degree(nvars, 0, deg, current, exponents_);
    sizes_[deg] = static_cast<int>(exponents_.size());
  }
  degrees_.reserve(exponents_.size());
  for (const auto& e : exponents_) {
    int d = 0;
    for (int v = 0; v < nvars; ++v) d += e[v];
    degrees_.push_back(d);
  }

  // Products sorted by total degree, so order-k multiplication uses a prefix.
  for (int total = 0; total <= kJetMaxOrder; ++total) {
    for (int i = 0; i < sizes_[total]; ++i) {
      for (int j = 0; j < sizes_[total]; ++j) {
        if (degrees_[i] + degrees_[j] != total) continue;
        Exponent sum{};
        for (int v = 0; v < nvars; ++v) sum[v] = exponents_[i][v] + exponents_[j][v];
        products_.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                             static_cast<std::uint16_t>(index_of(sum))});
      }
    }
    product_counts_[total] = static_cast<int>(products_.size());
  }

  for (int v = 0; v < nvars; ++v) {
    for (int i = 0; i < static_cast<int>(exponents_.size()); ++i) {
      if (exponents_[i][v] == 0) continue;
      Exponent lower = exponents_[i];
      lower[v] -= 1;
      shifts_[v].push_back({static_cast<std::uint16_t>(i),
                            static_cast<std::uint16_t>(index_of(lower)),
                            static_cast<double>(exponents_[i][v])});
    }
  }
}

int MonomialTable::index_of(const Exponent& e) const {
  int deg = 0;
  for (int v = 0; v < nvars_; ++v) deg += e[v];
  if (deg > kJetMaxOrder) return -1;
  const int begin = deg == 0 ? 0 : sizes_[deg - 1];
  for (int i = begin; i < sizes_[deg]; ++i) {
    if (exponents_[i] == e) return i;
  }
  return -1;
}

const MonomialTable& MonomialTable::get(int nvars) {
  static const std::array<std::unique_ptr<MonomialTable>, kJetMaxVars> tables = [] {
    std::array<std::unique_ptr<MonomialTable>, kJetMaxVars> t;
    for (int n = 1; n <= kJetMaxVars; ++n) t[n - 1].reset(new MonomialTable(n));
    return t;
  }();
  if (nvars < 1 || nvars > kJetMaxVars) throw std::invalid_argument("jet variable count out of range");
  return *tables[nvars - 1];
}

Jet::Jet(int nvars, int order, double value)
    : table_(&MonomialTable::get(nvars)), order_(order) {
  if (order < 0 || order > kJetMaxOrder) throw std::invalid_argument("jet order out of range");
  size_ = table_->size(order);
  std::fill_n(c_.begin(), size_, 0.0);
  c_[0] = value;
}

Jet Jet::variable(int nvars, int order, int var, double value) {
  Jet j(nvars, order, value);
  if (order >= 1) j.c_[1 + var] = 1.0;  // degree-1 monomials follow the constant, var 0 first
  return j;
}

Jet Jet::constant_like(const Jet& like, double value) {
  Jet j;
  j.table_ = like.table_;
  j.order_ = like.order_;
  j.size_ = like.size_;
  std::fill_n(j.c_.begin(), j.size_, 0.0);
  j.c_[0] = value;
  return j;
}

Jet::Jet(const Jet& other) : table_(other.table_), order_(other.order_), size_(other.size_) {
  std::copy_n(other.c_.begin(), size_, c_.begin());
}

Jet& Jet::operator=(const Jet& other) {
  if (this == &other) return *this;
  table_ = other.table_;
  order_ = other.order_;
  size_ = other.size_;
  std::copy_n(other.c_.begin(), size_, c_.begin());
  return *this;
}

double Jet::coeff(const Exponent& e) const {
  const int idx = table_->index_of(e);
  if (idx < 0 || idx >= size_) return 0.0;
  return c_[idx];
}

double Jet::partial(const Exponent& e) const {
  double f = 1.0;
  for (int v = 0; v < nvars(); ++v) f *= factorial(e[v]);
  return coeff(e) * f;
}

double Jet::partial(int var) const {
  if (order_ >= 1) return c_[1 + var];
  Exponent e{};
  e[var] = 1;
  return partial(e);
}

double Jet::partial(int var_a, int var_b) const {
  Exponent e{};
  e[var_a] += 1;
  e[var_b] += 1;
  return partial(e);
}

Jet Jet::derivative(int var) const {
  Jet out = constant_like(*this, 0.0);
  out.order_ = std::max(order_ - 1, 0);
  out.size_ = table_->size(out.order_);
  if (order_ == 0) return out;
  for (const auto& s : table_->derivative_shifts(var)) {
    if (s.from >= size_) continue;
    out.c_[s.to] += s.factor * c_[s.from];
  }
  return out;
}

Jet Jet::truncated(int order) const {
  Jet out(*this);
  out.order_ = std::min(order, order_);
  out.size_ = table_->size(out.order_);
  return out;
}

Jet Jet::without_var(int var) const {
  Jet out(*this);
  for (int i = 0; i < size_; ++i) {
    if (table_->exponent(i)[var] != 0) out.c_[i] = 0.0;
  }
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  assert(table_ == o.table_ && order_ == o.order_);
  for (int i = 0; i < size_; ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  assert(table_ == o.table_ && order_ == o.order_);
  for (int i = 0; i < size_; ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  *this = *this * reciprocal(o);
  return *this;
}

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (int i = 0; i < size_; ++i) c_[i] *= s;
  return *this;
}

Jet& Jet::operator/=(double s) {
  for (int i = 0; i < size_; ++i) c_[i] /= s;
  return *this;
}

Jet Jet::compose(std::span<const double> taylor) const {
  // Horner in the nilpotent part delta = u - u0.
  Jet delta(*this);
  delta.c_[0] = 0.0;
  const int top = std::min<int>(order_, static_cast<int>(taylor.size()) - 1);
  Jet result = constant_like(*this, taylor[top]);
  for (int m = top - 1; m >= 0; --m) {
    result = result * delta;
    result.c_[0] += taylor[m];
  }
  return result;
}

Jet operator*(const Jet& a, const Jet& b) {
  assert(&a.table() == &b.table() && a.order() == b.order());
  Jet out = Jet::constant_like(a, 0.0);
  for (const auto& p : a.table().products(a.order())) {
    out.coeff(p.out) += a.coeff(p.lhs) * b.coeff(p.rhs);
  }
  return out;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a) {
  Jet out = -a;
  out += s;
  return out;
}
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }
Jet operator-(const Jet& a) { return a * -1.0; }

namespace {

template <class Fn>
Jet compose_with(const Jet& a, Fn taylor_fn) {
  std::array<double, kJetMaxOrder + 1> t{};
  for (int m = 0; m <= a.order(); ++m) t[m] = taylor_fn(m);
  return a.compose(std::span<const double>(t.data(), a.order() + 1));
}

}  // namespace

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  return compose_with(a, [&](int m) { return e / factorial(m); });
}

Jet log(const Jet& a) {
  const double u = a.value();
  return compose_with(a, [&](int m) {
    if (m == 0) return std::log(u);
    const double sign = (m % 2 == 1) ? 1.0 : -1.0;
    return sign / (m * std::pow(u, m));
  });
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return compose_with(a, [&](int m) {
    const double d[4] = {s, c, -s, -c};
    return d[m % 4] / factorial(m);
  });
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return compose_with(a, [&](int m) {
    const double d[4] = {c, -s, -c, s};
    return d[m % 4] / factorial(m);
  });
}

Jet pow(const Jet& a, double p) {
  const double u = a.value();
  return compose_with(a, [&](int m) {
    // binom(p, m) u^(p - m)
    double coef = 1.0;
    for (int k = 0; k < m; ++k) coef *= (p - k) / (k + 1);
    return coef * std::pow(u, p - m);
  });
}

Jet sqrt(const Jet& a) { return pow(a, 0.5); }

Jet reciprocal(const Jet& a) {
  const double u = a.value();
  return compose_with(a, [&](int m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return sign / std::pow(u, m + 1);
  });
}

Jet pow(const Jet& a, int p) {
  if (p == 0) return Jet::constant_like(a, 1.0);
  if (p < 0) return reciprocal(pow(a, -p));
  Jet result = Jet::constant_like(a, 1.0);
  Jet base(a);
  int e = p;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e > 0) base = base * base;
  }
  return result;
}

std::vector<Jet> coordinate_jets(std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(Jet::variable(n, order, i, point[i]));
  return out;
}

}  // namespace morsefield
