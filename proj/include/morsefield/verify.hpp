#pragma once

// The identity suite behind `morsefield verify`: each check compares a
// closed-form quantity against an independent evaluation on a sample grid.

#include <cstdint>
#include <string>
#include <vector>

#include "morsefield/curvature.hpp"
#include "morsefield/patch.hpp"
#include "morsefield/patch_file.hpp"

namespace morsefield {

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool skipped = false;
  std::string note;

  bool passed() const { return skipped || residual <= tolerance; }
};

struct VerifyOptions {
  std::uint64_t seed = 20240611;
  int per_axis = 9;
  /// The linearized mean curvature and gradient-variation checks; analyze leaves them out.
  bool perturbation_checks = true;
};

/// max |a - b| / max(max |b|, 1e-8) over paired samples.
double relative_sup_error(const std::vector<double>& a, const std::vector<double>& b);

/// Random tangential symmetric tensor with affine-plus-quadratic entries in
/// (x, t), amplitudes in [-1, 1].
SymTensorField random_tangential_tensor(int n, std::uint64_t seed);
/// Random t-independent quadratic conformal factor.
ConformalFactor random_boundary_factor(int n, std::uint64_t seed);

std::vector<CheckResult> identity_suite(const MetricPatch& g, const std::vector<MirrorPair>& mirrors,
                                        const VerifyOptions& options = {});

}  // namespace morsefield
