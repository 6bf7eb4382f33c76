#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "morsefield/curvature.hpp"
#include "morsefield/fixtures.hpp"
#include "morsefield/grid.hpp"

using namespace morsefield;

namespace {

std::vector<double> sample(const GridSpec& spec, const std::function<double(const std::vector<double>&)>& fn) {
  std::vector<double> out(spec.node_count());
  std::vector<int> idx(spec.n, 0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::size_t rest = k;
    for (int a = 0; a < spec.n - 1; ++a) {
      idx[a] = static_cast<int>(rest % spec.nodes_x());
      rest /= spec.nodes_x();
    }
    idx[spec.n - 1] = static_cast<int>(rest);
    out[spec.flat_index(idx)] = fn(spec.node(idx));
  }
  return out;
}

}  // namespace

TEST_CASE("Fornberg weights reproduce the classical stencils") {
  const std::vector<double> nodes{-1.0, 0.0, 1.0};
  const auto d1 = fd_weights(0.0, nodes, 1);
  CHECK(d1[0] == doctest::Approx(-0.5));
  CHECK(d1[1] == doctest::Approx(0.0));
  CHECK(d1[2] == doctest::Approx(0.5));
  const auto d2 = fd_weights(0.0, nodes, 2);
  CHECK(d2[0] == doctest::Approx(1.0));
  CHECK(d2[1] == doctest::Approx(-2.0));
  CHECK(d2[2] == doctest::Approx(1.0));
  const std::vector<double> five{-2, -1, 0, 1, 2};
  const auto w = fd_weights(0.0, five, 1);
  CHECK(w[0] == doctest::Approx(1.0 / 12));
  CHECK(w[1] == doctest::Approx(-8.0 / 12));
  CHECK(w[3] == doctest::Approx(8.0 / 12));
  const auto one_sided = fd_weights(0.0, std::vector<double>{0, 1, 2}, 1);
  CHECK(one_sided[0] == doctest::Approx(-1.5));
  CHECK(one_sided[1] == doctest::Approx(2.0));
  CHECK(one_sided[2] == doctest::Approx(-0.5));
}

TEST_CASE("grid fields are exact on low-degree polynomials") {
  const GridSpec spec{3, 0.5, 0.2, 12, 8};
  auto poly = [](const std::vector<double>& p) { return 1 + p[0] * p[0] * p[1] - 2 * p[2] * p[2] * p[0] + p[1] * p[2]; };
  const Field f = grid_field(spec, sample(spec, poly));
  const std::vector<double> at{0.137, -0.211, 0.0731};
  const Jet j = f->jet(at, 2);
  CHECK(j.value() == doctest::Approx(poly(at)).epsilon(1e-12));
  CHECK(j.partial(0) == doctest::Approx(2 * at[0] * at[1] - 2 * at[2] * at[2]).epsilon(1e-10));
  CHECK(j.partial(1) == doctest::Approx(at[0] * at[0] + at[2]).epsilon(1e-10));
  CHECK(j.partial(2) == doctest::Approx(-4 * at[2] * at[0] + at[1]).epsilon(1e-10));
  CHECK(j.partial(0, 1) == doctest::Approx(2 * at[0]).epsilon(1e-9));
  CHECK(j.partial(2, 2) == doctest::Approx(-4 * at[0]).epsilon(1e-9));
}

TEST_CASE("sampled Fixture A reproduces its curvature") {
  const MetricPatch a = fixtures::fixture_a();
  const GridSpec spec{3, 0.5, 0.2, 32, 16};
  std::vector<std::vector<double>> packed(packed_size(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      packed[packed_index(3, i, j)] = sample(spec, [&](const std::vector<double>& p) { return a.metric(p)(i, j); });
    }
  }
  const MetricPatch g = grid_patch(spec, packed, "grid-A");
  CHECK(g.normal_gauge());
  const std::vector<double> x{0.1, -0.2};
  CHECK(std::abs(mean_curvature(g, x, 0.0)) < 1e-10);
  CHECK(sff_norm_sq(g, x, 0.0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("grid files round trip bit for bit") {
  const GridSpec spec{2, 0.8, 0.4, 6, 6};
  GridFile file;
  file.spec = spec;
  file.name = "round-trip";
  file.components = {sample(spec, [](const std::vector<double>& p) { return 1 + p[0] * p[1]; }),
                     sample(spec, [](const std::vector<double>&) { return 0.0; }),
                     sample(spec, [](const std::vector<double>& p) { return std::exp(p[1]); })};
  file.metadata["note"] = "unit";
  const auto path = std::filesystem::temp_directory_path() / "morsefield_grid_rt.mfgrid";
  write_grid_file(path.string(), file);
  CHECK(is_grid_file(path.string()));
  const GridFile back = read_grid_file(path.string());
  CHECK(back.name == "round-trip");
  CHECK(back.spec.cells_x == 6);
  CHECK(back.spec.R == 0.8);
  CHECK(back.components == file.components);
  CHECK(back.metadata["note"] == "unit");
  std::filesystem::remove(path);
}
