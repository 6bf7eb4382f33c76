#pragma once

#include <span>
#include <utility>
#include <vector>

#include "morsefield/field.hpp"

namespace morsefield {

/// Gauss-Legendre nodes and weights on [-1, 1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int nodes);

/// Jet at `point` of Phi(x, t) = int_0^t F(x, s) ds, with t the last chart
/// variable. Monomials containing t come from F's jet at the point; the pure-x
/// part is integrated by Gauss-Legendre quadrature of F's x-jets.
Jet time_integral_jet(const JetFunction& F, std::span<const double> point, int order, int nodes = 20);

}  // namespace morsefield
