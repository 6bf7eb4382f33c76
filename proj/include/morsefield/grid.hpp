#pragma once

// Sampled metric components on a regular lattice over [-R, R]^d x [0, T].
// Partials up to order 2 come from sixth-order finite-difference arrays built
// once per field; off-node values use local 4-point Lagrange interpolation.

#include <string>
#include <vector>

#include <json.hpp>

#include "morsefield/patch.hpp"

namespace morsefield {

struct GridSpec {
  int n = 3;
  double R = 0.5;
  double T = 0.2;
  int cells_x = 64;  // per tangential axis
  int cells_t = 32;

  int nodes_x() const { return cells_x + 1; }
  int nodes_t() const { return cells_t + 1; }
  std::size_t node_count() const;
  double spacing_x() const { return 2.0 * R / cells_x; }
  double spacing_t() const { return T / cells_t; }
  /// Axis 0 varies fastest, t slowest.
  std::size_t flat_index(std::span<const int> idx) const;
  std::vector<double> node(std::span<const int> idx) const;
};

/// Fornberg weights for the m-th derivative at z from the given nodes.
std::vector<double> fd_weights(double z, std::span<const double> nodes, int m);

/// `samples` follows GridSpec::flat_index. Needs at least 6 cells per axis.
Field grid_field(const GridSpec& spec, std::vector<double> samples);

/// Components whose samples are all the same value become constants.
MetricPatch grid_patch(const GridSpec& spec, const std::vector<std::vector<double>>& packed_samples,
                       std::string name);

struct GridFile {
  GridSpec spec;
  std::string name;
  std::vector<std::vector<double>> components;  // packed order
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

inline constexpr char kGridMagic[] = "MFGRID1\n";

/// Magic, uint64 header length, JSON header, then little-endian float64 samples.
void write_grid_file(const std::string& path, const GridFile& grid);
GridFile read_grid_file(const std::string& path);
bool is_grid_file(const std::string& path);

}  // namespace morsefield
