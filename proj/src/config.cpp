#include "ksdg/config.hpp"

#include "ksdg/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace ksdg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::optional<int> to_int(std::string_view s) {
  s = trim(s);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double expect_number(std::string_view s, std::string_view what) {
  if (auto v = to_double(s)) return *v;
  throw ValidationError("expected a number for " + std::string(what) + ", got '" + std::string(s) + "'");
}

TrigFunction parse_trig(std::string_view s) {
  if (s == "sin") return TrigFunction::Sin;
  if (s == "cos") return TrigFunction::Cos;
  throw ValidationError("expected sin or cos, got '" + std::string(s) + "'");
}

double eval_trig(TrigFunction f, double arg) { return f == TrigFunction::Sin ? std::sin(arg) : std::cos(arg); }

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line;
};

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"", {"preset"}},
      {"mesh", {"pattern", "n", "x_min", "x_max", "y_min", "y_max"}},
      {"params", {"k0", "k1", "k2", "k3", "k4", "tau", "eps", "dt", "t_end"}},
      {"initial", {"u0", "v0"}},
      {"output", {"csv", "vtk_dir", "snapshot_times"}},
      {"newton", {"tol", "max_iters", "damping", "max_halvings"}},
      {"scheme", {"flux"}},
  };
  return keys;
}

std::vector<double> default_snapshot_times(double t_end) {
  return {0.0, 0.25 * t_end, 0.5 * t_end, 0.75 * t_end, t_end};
}

} // namespace

double InitialExpression::operator()(double x, double y) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    if (const auto* c = std::get_if<ConstantTerm>(&term)) {
      sum += c->value;
    } else if (const auto* g = std::get_if<GaussianTerm>(&term)) {
      const double dx = x - g->x0;
      const double dy = y - g->y0;
      sum += g->amplitude * std::exp(-g->rate * (dx * dx + dy * dy));
    } else {
      const auto& t = std::get<TrigTerm>(term);
      sum += t.amplitude * eval_trig(t.fx, t.kx * std::numbers::pi * x) * eval_trig(t.fy, t.ky * std::numbers::pi * y);
    }
  }
  return sum;
}

InitialExpression parse_initial_expression(std::string_view text) {
  InitialExpression expr;
  text = trim(text);
  if (text.empty()) throw ValidationError("empty initial-condition expression");
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('(', pos);
    const auto close = text.find(')', pos);
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
      throw ValidationError("malformed term in '" + std::string(text) + "'");
    const auto name = trim(text.substr(pos, open - pos));
    const auto args = split(text.substr(open + 1, close - open - 1), ',');
    if (name == "const") {
      if (args.size() != 1) throw ValidationError("const takes 1 argument");
      expr.terms.emplace_back(ConstantTerm{expect_number(args[0], "const")});
    } else if (name == "gauss") {
      if (args.size() != 4) throw ValidationError("gauss takes 4 arguments (A, a, x0, y0)");
      expr.terms.emplace_back(GaussianTerm{expect_number(args[0], "gauss"), expect_number(args[1], "gauss"),
                                           expect_number(args[2], "gauss"), expect_number(args[3], "gauss")});
    } else if (name == "trig") {
      if (args.size() != 5) throw ValidationError("trig takes 5 arguments (A, f, kx, g, ky)");
      expr.terms.emplace_back(TrigTerm{expect_number(args[0], "trig"), parse_trig(args[1]),
                                       expect_number(args[2], "trig"), parse_trig(args[3]),
                                       expect_number(args[4], "trig")});
    } else {
      throw ValidationError("unknown term '" + std::string(name) + "'");
    }
    pos = close + 1;
    const auto rest = text.find_first_not_of(" \t", pos);
    if (rest == std::string_view::npos) break;
    if (text[rest] != '+') throw ValidationError("terms must be joined by '+'");
    pos = rest + 1;
  }
  return expr;
}

std::string to_string(const InitialExpression& expr) {
  std::string out;
  auto trig_name = [](TrigFunction f) { return f == TrigFunction::Sin ? "sin" : "cos"; };
  for (const auto& term : expr.terms) {
    if (!out.empty()) out += " + ";
    if (const auto* c = std::get_if<ConstantTerm>(&term)) {
      out += "const(" + format_double(c->value) + ")";
    } else if (const auto* g = std::get_if<GaussianTerm>(&term)) {
      out += "gauss(" + format_double(g->amplitude) + ", " + format_double(g->rate) + ", " + format_double(g->x0) +
             ", " + format_double(g->y0) + ")";
    } else {
      const auto& t = std::get<TrigTerm>(term);
      out += "trig(" + format_double(t.amplitude) + ", " + trig_name(t.fx) + ", " + format_double(t.kx) + ", " +
             trig_name(t.fy) + ", " + format_double(t.ky) + ")";
    }
  }
  return out;
}

InitialData interpolate_initial_data(const TriMesh& mesh, const InitialExpression& u0, const InitialExpression& v0) {
  InitialData data;
  data.u0.values.resize(mesh.num_cells());
  for (Index k = 0; k < mesh.num_cells(); ++k)
    data.u0[k] = u0(mesh.barycenters()(k, 0), mesh.barycenters()(k, 1));
  data.v0.values.resize(mesh.num_vertices());
  for (Index i = 0; i < mesh.num_vertices(); ++i) data.v0[i] = v0(mesh.vertices()(i, 0), mesh.vertices()(i, 1));
  return data;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"one_bulge", "three_bulges", "multi_peak"};
  return names;
}

bool is_preset(std::string_view name) {
  const auto& names = preset_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

PresetDefinition preset_definition(std::string_view name) {
  if (name == "one_bulge") {
    return {{{GaussianTerm{1000, 100, 0, 0}}}, {{GaussianTerm{500, 50, 0, 0}}}, 1, 1e-6, 1e-4, false};
  }
  if (name == "three_bulges") {
    return {{{GaussianTerm{900, 100, 0.2, 0}, GaussianTerm{800, 100, 0, 0.2}, GaussianTerm{1000, 100, 0.3, 0.3}}},
            {{ConstantTerm{0.0}}},
            0,
            1e-5,
            2e-3,
            true};
  }
  if (name == "multi_peak") {
    return {{{TrigTerm{1000, TrigFunction::Cos, 2, TrigFunction::Cos, 2}, ConstantTerm{1000}}},
            {{TrigTerm{500, TrigFunction::Sin, 3, TrigFunction::Sin, 3}, ConstantTerm{500}}},
            1,
            1e-7,
            1e-4,
            false};
  }
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

InitialData preset_initial_conditions(std::string_view name, const TriMesh& mesh) {
  const PresetDefinition def = preset_definition(name);
  InitialData data = interpolate_initial_data(mesh, def.u0, def.v0);
  if (def.v0_undefined)
    data.warnings.push_back("preset " + std::string(name) +
                            " defines no v0; using zero (v0 is not used when tau = 0)");
  return data;
}

bool RunConfig::operator==(const RunConfig& o) const {
  return pattern == o.pattern && n == o.n && domain.lower == o.domain.lower && domain.upper == o.domain.upper &&
         params == o.params && preset == o.preset && u0 == o.u0 && v0 == o.v0 && csv_path == o.csv_path &&
         vtk_dir == o.vtk_dir && snapshot_times == o.snapshot_times && newton == o.newton && flux == o.flux;
}

RunConfig load_config(std::string_view text) {
  std::vector<Entry> entries;
  std::string section;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_keys().contains(section)) throw ParseError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    const auto& allowed = known_keys().at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError(line_no, "unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    for (const auto& e : entries) {
      if (e.section == section && e.key == key)
        throw ParseError(line_no, "duplicate key '" + key + "' (first set on line " + std::to_string(e.line) + ")");
    }
    entries.push_back(Entry{section, key, value, line_no});
  }

  RunConfig cfg;
  auto find = [&](std::string_view sec, std::string_view key) -> const Entry* {
    for (const auto& e : entries)
      if (e.section == sec && e.key == key) return &e;
    return nullptr;
  };

  // Preset defaults first; explicit keys override them.
  if (const Entry* e = find("", "preset")) {
    if (!is_preset(e->value)) throw ParseError(e->line, "unknown preset '" + e->value + "'");
    const PresetDefinition def = preset_definition(e->value);
    cfg.preset = e->value;
    cfg.params.tau = def.tau;
    cfg.params.dt = def.dt;
    cfg.params.t_end = def.t_end;
  }

  for (const auto& e : entries) {
    auto number = [&]() {
      auto v = to_double(e.value);
      if (!v || !std::isfinite(*v)) throw ParseError(e.line, "'" + e.key + "' expects a number, got '" + e.value + "'");
      return *v;
    };
    auto integer = [&]() {
      auto v = to_int(e.value);
      if (!v) throw ParseError(e.line, "'" + e.key + "' expects an integer, got '" + e.value + "'");
      return *v;
    };
    auto positive = [&]() {
      const double v = number();
      if (!(v > 0.0)) throw ParseError(e.line, "'" + e.key + "' must be positive");
      return v;
    };

    const std::string& k = e.key;
    if (e.section == "mesh") {
      if (k == "pattern") {
        try {
          cfg.pattern = parse_mesh_pattern(e.value);
        } catch (const ValidationError& err) {
          throw ParseError(e.line, err.what());
        }
      } else if (k == "n") {
        cfg.n = integer();
        if (cfg.n < 1) throw ParseError(e.line, "n must be positive");
      } else if (k == "x_min") {
        cfg.domain.lower.x() = number();
      } else if (k == "x_max") {
        cfg.domain.upper.x() = number();
      } else if (k == "y_min") {
        cfg.domain.lower.y() = number();
      } else if (k == "y_max") {
        cfg.domain.upper.y() = number();
      }
    } else if (e.section == "params") {
      if (k == "tau") {
        const int tau = integer();
        if (tau != 0 && tau != 1) throw ParseError(e.line, "tau must be 0 or 1");
        cfg.params.tau = tau;
      } else {
        const double v = positive();
        if (k == "k0") cfg.params.k0 = v;
        else if (k == "k1") cfg.params.k1 = v;
        else if (k == "k2") cfg.params.k2 = v;
        else if (k == "k3") cfg.params.k3 = v;
        else if (k == "k4") cfg.params.k4 = v;
        else if (k == "eps") cfg.params.eps = v;
        else if (k == "dt") cfg.params.dt = v;
        else if (k == "t_end") cfg.params.t_end = v;
      }
    } else if (e.section == "initial") {
      try {
        (k == "u0" ? cfg.u0 : cfg.v0) = parse_initial_expression(e.value);
      } catch (const ValidationError& err) {
        throw ParseError(e.line, err.what());
      }
    } else if (e.section == "output") {
      if (k == "csv") {
        cfg.csv_path = e.value;
      } else if (k == "vtk_dir") {
        cfg.vtk_dir = e.value;
      } else if (k == "snapshot_times") {
        cfg.snapshot_times.clear();
        if (!e.value.empty()) {
          for (auto part : split(e.value, ',')) {
            auto v = to_double(part);
            if (!v) throw ParseError(e.line, "bad snapshot time '" + std::string(part) + "'");
            cfg.snapshot_times.push_back(*v);
          }
        }
      }
    } else if (e.section == "newton") {
      if (k == "tol") {
        cfg.newton.tol_residual = positive();
      } else if (k == "max_iters") {
        cfg.newton.max_iters = integer();
        if (cfg.newton.max_iters < 1) throw ParseError(e.line, "max_iters must be at least 1");
      } else if (k == "max_halvings") {
        cfg.newton.max_halvings = integer();
        if (cfg.newton.max_halvings < 0) throw ParseError(e.line, "max_halvings must be nonnegative");
      } else if (k == "damping") {
        if (e.value == "none") cfg.newton.damping = Damping::None;
        else if (e.value == "backtracking") cfg.newton.damping = Damping::Backtracking;
        else throw ParseError(e.line, "damping must be 'none' or 'backtracking'");
      }
    } else if (e.section == "scheme") {
      if (e.value == "truncated") cfg.flux = FluxMode::Truncated;
      else if (e.value == "non_truncated") cfg.flux = FluxMode::NonTruncated;
      else throw ParseError(e.line, "flux must be 'truncated' or 'non_truncated'");
    }
  }

  auto line_of = [&](std::string_view sec, std::string_view key) {
    const Entry* e = find(sec, key);
    return e ? e->line : 0;
  };

  if (!(cfg.domain.width() > 0.0) || !(cfg.domain.height() > 0.0))
    throw ParseError(line_of("mesh", "x_max"), "domain must have positive width and height");
  if (cfg.pattern == MeshPattern::Mesh1 && cfg.n % 2 != 0)
    throw ParseError(line_of("mesh", "n"), "Mesh1 needs an even n");
  if (cfg.preset.empty() && !cfg.u0)
    throw ParseError(0, "no initial condition: set 'preset' or [initial] u0");

  if (!find("output", "snapshot_times")) cfg.snapshot_times = default_snapshot_times(cfg.params.t_end);
  for (double t : cfg.snapshot_times) {
    if (t < 0.0 || t > cfg.params.t_end)
      throw ParseError(line_of("output", "snapshot_times"), "snapshot time " + format_double(t) + " outside [0, t_end]");
  }
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  if (!c.preset.empty()) out << "preset = " << c.preset << "\n";
  out << "\n[mesh]\n"
      << "pattern = " << to_string(c.pattern) << "\n"
      << "n = " << c.n << "\n"
      << "x_min = " << format_double(c.domain.lower.x()) << "\n"
      << "x_max = " << format_double(c.domain.upper.x()) << "\n"
      << "y_min = " << format_double(c.domain.lower.y()) << "\n"
      << "y_max = " << format_double(c.domain.upper.y()) << "\n";
  const auto& p = c.params;
  out << "\n[params]\n"
      << "k0 = " << format_double(p.k0) << "\n"
      << "k1 = " << format_double(p.k1) << "\n"
      << "k2 = " << format_double(p.k2) << "\n"
      << "k3 = " << format_double(p.k3) << "\n"
      << "k4 = " << format_double(p.k4) << "\n"
      << "tau = " << p.tau << "\n"
      << "eps = " << format_double(p.eps) << "\n"
      << "dt = " << format_double(p.dt) << "\n"
      << "t_end = " << format_double(p.t_end) << "\n";
  if (c.u0 || c.v0) {
    out << "\n[initial]\n";
    if (c.u0) out << "u0 = " << to_string(*c.u0) << "\n";
    if (c.v0) out << "v0 = " << to_string(*c.v0) << "\n";
  }
  out << "\n[output]\n";
  if (!c.csv_path.empty()) out << "csv = " << c.csv_path << "\n";
  if (!c.vtk_dir.empty()) out << "vtk_dir = " << c.vtk_dir << "\n";
  out << "snapshot_times = ";
  for (std::size_t i = 0; i < c.snapshot_times.size(); ++i)
    out << (i ? ", " : "") << format_double(c.snapshot_times[i]);
  out << "\n\n[newton]\n"
      << "tol = " << format_double(c.newton.tol_residual) << "\n"
      << "max_iters = " << c.newton.max_iters << "\n"
      << "damping = " << (c.newton.damping == Damping::None ? "none" : "backtracking") << "\n"
      << "max_halvings = " << c.newton.max_halvings << "\n"
      << "\n[scheme]\n"
      << "flux = " << (c.flux == FluxMode::Truncated ? "truncated" : "non_truncated") << "\n";
  return out.str();
}

InitialData initial_conditions(const RunConfig& config, const TriMesh& mesh) {
  InitialExpression u0;
  InitialExpression v0{{ConstantTerm{0.0}}};
  InitialData data;
  if (!config.preset.empty()) {
    const PresetDefinition def = preset_definition(config.preset);
    u0 = def.u0;
    v0 = def.v0;
    if (def.v0_undefined && !config.v0)
      data.warnings.push_back("preset " + config.preset + " defines no v0; using zero (v0 is not used when tau = 0)");
  }
  if (config.u0) u0 = *config.u0;
  if (config.v0) v0 = *config.v0;
  InitialData fields = interpolate_initial_data(mesh, u0, v0);
  fields.warnings = std::move(data.warnings);
  return fields;
}

} // namespace ksdg
