#include "morsefield/grid.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "morsefield/error.hpp"

namespace morsefield {

std::size_t GridSpec::node_count() const {
  std::size_t c = nodes_t();
  for (int a = 0; a < n - 1; ++a) c *= nodes_x();
  return c;
}

std::size_t GridSpec::flat_index(std::span<const int> idx) const {
  std::size_t f = idx[n - 1];
  for (int a = n - 2; a >= 0; --a) f = f * nodes_x() + idx[a];
  return f;
}

std::vector<double> GridSpec::node(std::span<const int> idx) const {
  std::vector<double> p(n);
  for (int a = 0; a < n - 1; ++a) p[a] = -R + spacing_x() * idx[a];
  p[n - 1] = spacing_t() * idx[n - 1];
  return p;
}

std::vector<double> fd_weights(double z, std::span<const double> nodes, int m) {
  const int np = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(np, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = nodes[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < np; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(np);
  for (int i = 0; i < np; ++i) w[i] = c[i][m];
  return w;
}

namespace {

constexpr int kStencil = 7;
constexpr int kInterp = 4;

struct AxisStencils {
  std::vector<int> start;
  std::vector<std::array<double, kStencil>> weights;
};

AxisStencils first_derivative_stencils(int cells, double h) {
  AxisStencils s;
  const int nodes = cells + 1;
  for (int i = 0; i < nodes; ++i) {
    const int st = std::clamp(i - kStencil / 2, 0, nodes - kStencil);
    std::array<double, kStencil> x{};
    for (int k = 0; k < kStencil; ++k) x[k] = (st + k) * h;
    const auto w = fd_weights(i * h, x, 1);
    std::array<double, kStencil> wa{};
    std::copy(w.begin(), w.end(), wa.begin());
    s.start.push_back(st);
    s.weights.push_back(wa);
  }
  return s;
}

std::vector<double> differentiate(const GridSpec& spec, const std::vector<double>& f, int axis,
                                  const AxisStencils& st) {
  const int n = spec.n;
  std::vector<int> extent(n, spec.nodes_x());
  extent[n - 1] = spec.nodes_t();
  std::size_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= extent[a];
  std::vector<double> out(f.size());
  const int len = extent[axis];
  for (std::size_t base = 0; base < f.size(); ++base) {
    const int i = static_cast<int>((base / stride) % len);
    const std::size_t origin = base - static_cast<std::size_t>(i) * stride;
    double s = 0.0;
    for (int k = 0; k < kStencil; ++k) s += st.weights[i][k] * f[origin + (st.start[i] + k) * stride];
    out[base] = s;
  }
  return out;
}

double factorial_of(const Exponent& e, int n) {
  double f = 1.0;
  for (int a = 0; a < n; ++a) {
    for (int k = 2; k <= e[a]; ++k) f *= k;
  }
  return f;
}

class GridField final : public ScalarField {
 public:
  GridField(const GridSpec& spec, std::vector<double> samples) : spec_(spec) {
    if (samples.size() != spec.node_count()) throw std::invalid_argument("grid sample count mismatch");
    if (spec.cells_x < kStencil - 1 || spec.cells_t < kStencil - 1) {
      throw std::invalid_argument("grid needs at least 6 cells per axis");
    }
    const int n = spec.n;
    const auto& table = MonomialTable::get(n);
    std::vector<AxisStencils> st;
    for (int a = 0; a < n; ++a) {
      st.push_back(a < n - 1 ? first_derivative_stencils(spec.cells_x, spec.spacing_x())
                             : first_derivative_stencils(spec.cells_t, spec.spacing_t()));
    }
    partials_.resize(table.size(kOrder));
    std::vector<std::vector<double>> first(n);
    for (int a = 0; a < n; ++a) first[a] = differentiate(spec, samples, a, st[a]);
    for (int idx = 1; idx < table.size(kOrder); ++idx) {
      const Exponent& e = table.exponent(idx);
      int lo = -1, hi = -1;
      for (int a = 0; a < n; ++a) {
        for (int k = 0; k < e[a]; ++k) (lo < 0 ? lo : hi) = a;
      }
      partials_[idx] = hi < 0 ? first[lo] : differentiate(spec, first[lo], hi, st[hi]);
    }
    partials_[0] = std::move(samples);
    for (int idx = 0; idx < table.size(kOrder); ++idx) inv_factorial_.push_back(1.0 / factorial_of(table.exponent(idx), n));
  }

  int dim() const override { return spec_.n; }
  int max_order() const override { return kOrder; }

  Jet jet(std::span<const double> point, int order) const override {
    if (order > kOrder) throw std::invalid_argument("grid fields supply partials up to order 2");
    const int n = spec_.n;
    std::array<int, kJetMaxVars> i0{};
    std::array<std::array<double, kInterp>, kJetMaxVars> w{};
    for (int a = 0; a < n; ++a) {
      const bool tangential = a < n - 1;
      const double h = tangential ? spec_.spacing_x() : spec_.spacing_t();
      const int cells = tangential ? spec_.cells_x : spec_.cells_t;
      const double u = (point[a] - (tangential ? -spec_.R : 0.0)) / h;
      if (!(u >= -1e-9 && u <= cells + 1e-9)) throw ChartRadiusError("point outside the sampled grid");
      i0[a] = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, cells + 1 - kInterp);
      const double z = u - i0[a];
      for (int k = 0; k < kInterp; ++k) {
        double l = 1.0;
        for (int m = 0; m < kInterp; ++m) {
          if (m != k) l *= (z - m) / (k - m);
        }
        w[a][k] = l;
      }
    }

    Jet out(n, order, 0.0);
    const int count = out.size();
    std::array<int, kJetMaxVars> off{};
    std::array<int, kJetMaxVars> idx{};
    while (true) {
      double weight = 1.0;
      for (int a = 0; a < n; ++a) {
        weight *= w[a][off[a]];
        idx[a] = i0[a] + off[a];
      }
      const std::size_t f = spec_.flat_index(std::span<const int>(idx.data(), n));
      for (int c = 0; c < count; ++c) out.coeff(c) += weight * partials_[c][f];
      int a = 0;
      while (a < n && ++off[a] == kInterp) off[a++] = 0;
      if (a == n) break;
    }
    for (int c = 0; c < count; ++c) out.coeff(c) *= inv_factorial_[c];
    return out;
  }

 private:
  static constexpr int kOrder = 2;
  GridSpec spec_;
  std::vector<std::vector<double>> partials_;
  std::vector<double> inv_factorial_;
};

template <class T>
void write_le(std::ostream& os, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
  } else {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
}

template <class T>
T read_le(const char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::vector<std::string> component_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) names.push_back("g." + std::to_string(i + 1) + "." + std::to_string(j + 1));
  }
  return names;
}

}  // namespace

Field grid_field(const GridSpec& spec, std::vector<double> samples) {
  return std::make_shared<GridField>(spec, std::move(samples));
}

MetricPatch grid_patch(const GridSpec& spec, const std::vector<std::vector<double>>& packed_samples,
                       std::string name) {
  if (static_cast<int>(packed_samples.size()) != packed_size(spec.n)) {
    throw std::invalid_argument("grid patch needs one sample array per component");
  }
  std::vector<Field> packed;
  for (const auto& s : packed_samples) {
    const bool constant = !s.empty() && std::all_of(s.begin(), s.end(), [&](double v) { return v == s.front(); });
    packed.push_back(constant ? constant_field(s.front(), spec.n) : grid_field(spec, s));
  }
  return MetricPatch(ChartDomain{spec.n, spec.R, spec.T}, SymmetricComponents(spec.n, std::move(packed)),
                     std::move(name));
}

void write_grid_file(const std::string& path, const GridFile& grid) {
  const GridSpec& s = grid.spec;
  nlohmann::ordered_json h;
  h["format"] = "morsefield-grid";
  h["version"] = 1;
  h["name"] = grid.name;
  h["n"] = s.n;
  h["R"] = s.R;
  h["T"] = s.T;
  h["cells"] = {s.cells_x, s.cells_t};
  h["nodes"] = {s.nodes_x(), s.nodes_t()};
  h["spacing"] = {s.spacing_x(), s.spacing_t()};
  h["layout"] = "component-major, x1 fastest, t slowest";
  h["components"] = component_names(s.n);
  h["metadata"] = grid.metadata;
  const std::string header = h.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kGridMagic, sizeof(kGridMagic) - 1);
  write_le<std::uint64_t>(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& c : grid.components) {
    if (c.size() != s.node_count()) throw std::invalid_argument("grid component has the wrong sample count");
    for (double v : c) write_le<double>(os, v);
  }
  if (!os) throw std::runtime_error("failed writing " + path);
}

bool is_grid_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  char buf[sizeof(kGridMagic) - 1] = {};
  is.read(buf, sizeof buf);
  return is.gcount() == static_cast<std::streamsize>(sizeof buf) && std::memcmp(buf, kGridMagic, sizeof buf) == 0;
}

GridFile read_grid_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw PatchFileError(path, 0, "cannot open file");
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  const std::size_t magic = sizeof(kGridMagic) - 1;
  if (bytes.size() < magic + 8 || bytes.compare(0, magic, kGridMagic) != 0) {
    throw PatchFileError(path, 0, "not a grid file");
  }
  const auto hlen = read_le<std::uint64_t>(bytes.data() + magic);
  if (hlen > bytes.size() - magic - 8) throw PatchFileError(path, 0, "truncated header");
  nlohmann::ordered_json h;
  try {
    h = nlohmann::ordered_json::parse(bytes.substr(magic + 8, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw PatchFileError(path, 0, std::string("bad grid header: ") + e.what());
  }
  GridFile g;
  try {
    g.spec.n = h.at("n").get<int>();
    g.spec.R = h.at("R").get<double>();
    g.spec.T = h.at("T").get<double>();
    g.spec.cells_x = h.at("cells").at(0).get<int>();
    g.spec.cells_t = h.at("cells").at(1).get<int>();
    g.name = h.value("name", std::string());
    if (h.contains("metadata")) g.metadata = h.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw PatchFileError(path, 0, std::string("bad grid header: ") + e.what());
  }
  if (g.spec.n < 2 || g.spec.n > kJetMaxVars || g.spec.cells_x < 1 || g.spec.cells_t < 1) {
    throw PatchFileError(path, 0, "grid dimensions out of range");
  }
  const std::size_t count = g.spec.node_count();
  const std::size_t ncomp = packed_size(g.spec.n);
  const std::size_t offset = magic + 8 + hlen;
  if (bytes.size() - offset != ncomp * count * sizeof(double)) {
    throw PatchFileError(path, 0, "sample block size does not match the header");
  }
  const char* p = bytes.data() + offset;
  for (std::size_t c = 0; c < ncomp; ++c) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i, p += sizeof(double)) v[i] = read_le<double>(p);
    g.components.push_back(std::move(v));
  }
  return g;
}

}  // namespace morsefield
