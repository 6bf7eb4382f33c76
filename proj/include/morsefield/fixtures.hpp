#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morsefield/patch.hpp"

namespace morsefield::fixtures {

/// dt^2 + (1 - 2t) dx1^2 + (1 + 2t) dx2^2: minimal, |II|^2 = 2 everywhere.
MetricPatch fixture_a(double R = 0.5, double T = 0.2);
/// g_11 = 1 - 2t(1 + |x|^2), g_22 = 1 + 2t(1 + |x|^2): nondegenerate minimum at 0.
MetricPatch fixture_b(double R = 0.5, double T = 0.2);
/// g_11 = 1 - 2t(1 + x1^4), g_22 = 1 + 2t(1 + x1^4): degenerate along x1 = 0.
MetricPatch fixture_c(double R = 0.5, double T = 0.2);
MetricPatch flat_half_space(int n = 3, double R = 0.5, double T = 0.2);
/// g_11 = g_22 = (1 - t)^2: H = 2, not minimal.
MetricPatch sphere_like(double R = 0.5, double T = 0.2);
/// The flat metric in coordinates x1' = x1 + 0.3 t.
MetricPatch sheared_flat(double R = 1.0, double T = 0.4);
/// Fixture A in the same sheared coordinates.
MetricPatch sheared_fixture_a(double R = 1.0, double T = 0.2);
/// Flat half-plane in the skewed chart X = s + 0.3t + 0.1s^2, Y = t + 0.2st (n = 2).
MetricPatch skewed_half_disk(double R = 0.8, double T = 0.4);

/// Random minimal, nowhere-umbilic normal-gauge patch with a Fermi center at 0 (n = 3).
MetricPatch random_minimal(std::uint64_t seed, double R = 0.5, double T = 0.1);
/// Random normal-gauge patch without the minimality constraint (n = 3 or 4).
MetricPatch random_normal_gauge(std::uint64_t seed, int n = 3, double R = 0.5, double T = 0.1);
/// Random analytic metric in a general boundary-adapted chart (g_tn != 0).
MetricPatch random_general_chart(std::uint64_t seed, int n = 3, double R = 1.0, double T = 0.4);

/// Names accepted by by_name: A, B, C, flat, sphere, sheared, sheared_A, skewed.
MetricPatch by_name(const std::string& name);
std::vector<std::string> names();

}  // namespace morsefield::fixtures
