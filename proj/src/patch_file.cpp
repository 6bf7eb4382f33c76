#include "morsefield/patch_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "morsefield/error.hpp"

namespace morsefield {

namespace {

struct Entry {
  std::string value;
  bool quoted = false;
  std::size_t line = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string strip_comment(std::string_view line) {
  bool in_quote = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

double parse_double(const Entry& e, const std::string& key, const std::string& origin) {
  if (e.quoted) throw PatchFileError(origin, e.line, "'" + key + "' must be a number");
  double v = 0.0;
  const char* end = e.value.data() + e.value.size();
  const auto res = std::from_chars(e.value.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw PatchFileError(origin, e.line, "'" + key + "' is not a finite number: " + e.value);
  }
  return v;
}

int parse_int(const Entry& e, const std::string& key, const std::string& origin) {
  if (e.quoted) throw PatchFileError(origin, e.line, "'" + key + "' must be an integer");
  int v = 0;
  const char* end = e.value.data() + e.value.size();
  const auto res = std::from_chars(e.value.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw PatchFileError(origin, e.line, "'" + key + "' is not an integer: " + e.value);
  }
  return v;
}

// "g.<i>.<j>" with 1-based indices; false if the key is not of that shape.
bool component_key(const std::string& key, int& i, int& j) {
  if (key.size() < 5 || key.compare(0, 2, "g.") != 0) return false;
  const auto dot = key.find('.', 2);
  if (dot == std::string::npos) return false;
  const char* b1 = key.data() + 2;
  const char* e1 = key.data() + dot;
  const char* b2 = key.data() + dot + 1;
  const char* e2 = key.data() + key.size();
  if (std::from_chars(b1, e1, i).ptr != e1 || std::from_chars(b2, e2, j).ptr != e2) return false;
  return b1 != e1 && b2 != e2;
}

std::string number_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

LoadedPatch parse_patch_text(std::string_view text, const std::string& origin) {
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PatchFileError(origin, line_no, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw PatchFileError(origin, line_no, "missing key");
    if (value.empty()) throw PatchFileError(origin, line_no, "missing value for '" + key + "'");
    Entry e;
    e.line = line_no;
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"' || value.find('"', 1) != value.size() - 1) {
        throw PatchFileError(origin, line_no, "unterminated string for '" + key + "'");
      }
      e.value = value.substr(1, value.size() - 2);
      e.quoted = true;
    } else {
      e.value = value;
    }
    if (entries.count(key)) {
      throw PatchFileError(origin, line_no, "duplicate key '" + key + "' (first on line " +
                                                std::to_string(entries[key].line) + ")");
    }
    entries.emplace(key, std::move(e));
  }

  auto require = [&](const std::string& key) -> const Entry& {
    const auto it = entries.find(key);
    if (it == entries.end()) throw PatchFileError(origin, 0, "missing required key '" + key + "'");
    return it->second;
  };

  LoadedPatch out;
  out.path = origin;
  const int n = parse_int(require("n"), "n", origin);
  if (n < 2 || n > kJetMaxVars) throw PatchFileError(origin, require("n").line, "n must be between 2 and 4");
  const double R = parse_double(require("R"), "R", origin);
  const double T = parse_double(require("T"), "T", origin);
  if (!(R > 0.0)) throw PatchFileError(origin, require("R").line, "R must be positive");
  if (!(T > 0.0)) throw PatchFileError(origin, require("T").line, "T must be positive");

  std::string name;
  if (const auto it = entries.find("name"); it != entries.end()) {
    if (!it->second.quoted) throw PatchFileError(origin, it->second.line, "'name' must be a quoted string");
    name = it->second.value;
  }
  if (const auto it = entries.find("gauge"); it != entries.end()) {
    if (!it->second.quoted || (it->second.value != "normal" && it->second.value != "general")) {
      throw PatchFileError(origin, it->second.line, "gauge must be \"normal\" or \"general\"");
    }
    out.declared_normal = it->second.value == "normal";
  }

  const auto vars = chart_variables(n);
  std::map<std::pair<int, int>, std::pair<Expression, std::size_t>> given;
  for (const auto& [key, e] : entries) {
    if (key == "n" || key == "R" || key == "T" || key == "name" || key == "gauge") continue;
    int i = 0, j = 0;
    if (!component_key(key, i, j)) throw PatchFileError(origin, e.line, "unknown key '" + key + "'");
    if (i < 1 || i > n || j < 1 || j > n) {
      throw PatchFileError(origin, e.line, "component index out of range in '" + key + "'");
    }
    if (!e.quoted) throw PatchFileError(origin, e.line, "component '" + key + "' must be a quoted expression");
    try {
      given.emplace(std::make_pair(i - 1, j - 1), std::make_pair(parse(e.value, vars), e.line));
    } catch (const ParseError& err) {
      throw PatchFileError(origin, e.line, "in '" + key + "': " + err.what());
    }
  }

  const int t = n - 1;
  std::vector<Field> packed(packed_size(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const auto up = given.find({i, j});
      const auto lo = given.find({j, i});
      const bool has_up = up != given.end();
      const bool has_lo = i != j && lo != given.end();
      if (has_up && has_lo) {
        out.mirrors.push_back({i, j, up->second.first, lo->second.first, up->second.second, lo->second.second});
      }
      std::optional<Expression> e;
      std::size_t line = 0;
      if (has_up) {
        e = up->second.first;
        line = up->second.second;
      } else if (has_lo) {
        e = lo->second.first;
        line = lo->second.second;
      }
      const std::string label = "g." + std::to_string(i + 1) + "." + std::to_string(j + 1);
      if (out.declared_normal && j == t) {
        const double expected = i == t ? 1.0 : 0.0;
        if (e && !e->folded().is_constant(expected)) {
          throw PatchFileError(origin, line, label + " must be " + number_text(expected) + " in normal gauge");
        }
        e = Expression::constant(expected);
      }
      if (!e) {
        if (i == j) throw PatchFileError(origin, 0, "missing diagonal component " + label);
        e = Expression::constant(0.0);
      }
      packed[packed_index(n, i, j)] = expression_field(*e, n);
    }
  }
  out.patch = MetricPatch(ChartDomain{n, R, T}, SymmetricComponents(n, std::move(packed)), name);
  return out;
}

LoadedPatch load_patch_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PatchFileError(path, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();

  LoadedPatch out;
  if (bytes.compare(0, sizeof(kGridMagic) - 1, kGridMagic) == 0) {
    GridFile grid = read_grid_file(path);
    out.patch = grid_patch(grid.spec, grid.components, grid.name);
    out.declared_normal = out.patch.normal_gauge();
    out.grid = std::move(grid);
    out.path = path;
  } else {
    out = parse_patch_text(bytes, path);
  }
  out.bytes = std::move(bytes);
  return out;
}

double mirror_mismatch(const MirrorPair& m, const ChartDomain& domain) {
  double worst = 0.0;
  for (const auto& p : domain.validation_points()) {
    worst = std::max(worst, std::abs(m.upper.evaluate(p) - m.lower.evaluate(p)));
  }
  return worst;
}

std::string patch_file_text(const MetricPatch& g) {
  if (!g.symbolic()) throw std::invalid_argument("only symbolic patches can be written as text");
  const int n = g.n();
  std::string out;
  if (!g.name().empty()) out += "name = \"" + g.name() + "\"\n";
  out += "n = " + std::to_string(n) + "\n";
  out += "R = " + number_text(g.R()) + "\n";
  out += "T = " + number_text(g.T()) + "\n";
  out += std::string("gauge = \"") + (g.normal_gauge() ? "normal" : "general") + "\"\n";
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const Expression& e = *g.component(i, j)->expression();
      if (g.normal_gauge() && j == n - 1) continue;
      if (i != j && e.folded().is_constant(0.0)) continue;
      out += "g." + std::to_string(i + 1) + "." + std::to_string(j + 1) + " = \"" + e.to_string() + "\"\n";
    }
  }
  return out;
}

void write_patch_file(const std::string& path, const MetricPatch& g) {
  const std::string text = patch_file_text(g);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace morsefield
