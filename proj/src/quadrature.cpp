#include "morsefield/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace morsefield {

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int nodes) {
  static std::mutex mu;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(nodes);
  if (it != cache.end()) return it->second;
  if (nodes < 1) throw std::invalid_argument("quadrature needs at least one node");

  std::vector<double> x(nodes), w(nodes);
  for (int i = 0; i < nodes; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (nodes + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= nodes; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (nodes == 1) p0 = 1.0;
      dp = nodes * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return cache.emplace(nodes, std::make_pair(std::move(x), std::move(w))).first->second;
}

Jet time_integral_jet(const JetFunction& F, std::span<const double> point, int order, int nodes) {
  const int n = static_cast<int>(point.size());
  const int tv = n - 1;
  const double t0 = point[tv];
  const auto& table = MonomialTable::get(n);
  Jet out(n, order, 0.0);

  if (order >= 1) {
    const Jet f = F(point, order - 1);
    for (int idx = 0; idx < out.size(); ++idx) {
      Exponent e = table.exponent(idx);
      if (e[tv] == 0) continue;
      const int a = e[tv];
      e[tv] -= 1;
      out.coeff(idx) = f.coeff(e) / a;
    }
  }

  if (t0 != 0.0) {
    const auto& [gx, gw] = gauss_legendre(nodes);
    std::vector<double> p(point.begin(), point.end());
    for (int q = 0; q < nodes; ++q) {
      p[tv] = 0.5 * t0 * (gx[q] + 1.0);
      const double wq = 0.5 * t0 * gw[q];
      const Jet f = F(p, order);
      for (int idx = 0; idx < out.size(); ++idx) {
        if (table.exponent(idx)[tv] != 0) continue;
        out.coeff(idx) += wq * f.coeff(idx);
      }
    }
  }
  return out;
}

}  // namespace morsefield
