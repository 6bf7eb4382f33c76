#pragma once

// Patch definition files:
//
//   name = "fixture-a"
//   n = 3
//   R = 0.5
//   T = 0.2
//   gauge = "normal"        # or "general"
//   g.1.1 = "1 - 2*t"
//
// Indices are 1-based and index n is the normal coordinate t. Unlisted
// off-diagonal components are 0; g.n.n defaults to 1 in normal gauge.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morsefield/expr.hpp"
#include "morsefield/grid.hpp"
#include "morsefield/patch.hpp"

namespace morsefield {

/// A component given both as g.i.j and g.j.i (0-based, i < j).
struct MirrorPair {
  int i = 0;
  int j = 0;
  Expression upper;  // as written for g.(i+1).(j+1)
  Expression lower;  // as written for g.(j+1).(i+1)
  std::size_t upper_line = 0;
  std::size_t lower_line = 0;
};

struct LoadedPatch {
  MetricPatch patch;
  std::string path;
  std::string bytes;  // raw file contents, for the digest
  bool declared_normal = false;
  std::vector<MirrorPair> mirrors;
  std::optional<GridFile> grid;  // set when the file is a binary grid patch
};

/// Text or binary grid file, chosen by the magic bytes. PatchFileError on any
/// syntax or content problem; SpdViolationError if the metric is not positive
/// definite.
LoadedPatch load_patch_file(const std::string& path);
LoadedPatch parse_patch_text(std::string_view text, const std::string& origin);

/// Max |upper - lower| over the validation grid of the patch domain.
double mirror_mismatch(const MirrorPair& m, const ChartDomain& domain);

/// std::invalid_argument for non-symbolic patches.
std::string patch_file_text(const MetricPatch& g);
void write_patch_file(const std::string& path, const MetricPatch& g);

}  // namespace morsefield
